#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medpoc/ordered_data.hpp"
#include "medpoc/rng.hpp"
#include "medpoc/scm.hpp"

namespace medpoc {

/// Closed-form quantities of the preset Bernoulli model with y = 1, x' = 0,
/// x = 1, written directly in terms of sigmoid(1), sigmoid(1.5), sigmoid(2).
struct PresetClosedForm {
  double a;      // P(Y < 1 | X = 0)
  double b;      // P(Y < 1 | X = 1)
  double rho;    // P(Y_{0,M_1} < 1)
  double t, nd, ni;
  double pn, nd_pn, ni_pn;
  double ps, nd_ps, ni_ps;
  double cd;     // m = 1
  double cd_evidence;  // evidence (x* = 1, m* = 1, Y in [1, 1])
};

PresetClosedForm preset_closed_form();

// ---------------------------------------------------------------------------
// Random model generators shared by the acceptance suite and the tests.

/// Unstructured threshold model: random survival tables, no monotone
/// coupling across parents.  Optionally one binary covariate.
Scm random_threshold_scm(Rng& rng);

/// Threshold model built to satisfy the monotonicity assumptions: outcome
/// survival bands ordered by level, parent index ordered lexicographically
/// (treatment before mediator), mediator survival ordered in treatment.  May
/// tie adjacent outcome levels so that one level has probability zero.
Scm random_monotone_scm(Rng& rng);

/// Model with a discrete mediator noise (atoms) whose mediator and outcome
/// are jointly monotone in the lexicographic order of (u_M, u_Y).
Scm random_lexicographic_scm(Rng& rng);

/// Random query with thresholds drawn around the model's levels.
Query random_query(const Scm& scm, Rng& rng, bool with_m);

/// Random outcome interval over the model's outcome levels, biased towards
/// zero-probability levels when present.
Interval random_outcome_interval(const Scm& scm, Rng& rng);
Interval random_mediator_interval(const Scm& scm, Rng& rng);

// ---------------------------------------------------------------------------
// Acceptance criteria.

struct VerifyRow {
  std::string quantity;
  std::optional<double> truth;
  std::optional<double> estimate;
  std::optional<double> lower;
  std::optional<double> upper;
  double tolerance = 0.0;
  bool passed = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  bool excluded = false;  // documented as not reproducible
  std::string detail;
  double seconds = 0.0;
  std::vector<VerifyRow> rows;
};

struct VerifyOptions {
  bool quick = false;           // smaller replicate counts for interactive use
  std::uint64_t seed = 20240611;
};

CriterionResult criterion_exact_truths(const VerifyOptions& o);        // 1
CriterionResult criterion_estimation_protocol(const VerifyOptions& o); // 2
CriterionResult criterion_pn_family(const VerifyOptions& o);           // 3
CriterionResult criterion_decomposition(const VerifyOptions& o);       // 4
CriterionResult criterion_oracle_equivalence(const VerifyOptions& o);  // 5
CriterionResult criterion_reductions(const VerifyOptions& o);          // 6
CriterionResult criterion_coverage(const VerifyOptions& o);            // 7
CriterionResult criterion_excluded(const VerifyOptions& o);            // 8

std::vector<CriterionResult> run_all_criteria(const VerifyOptions& o);

/// One line: "[PASS] criterion 1: title (1.23 s): detail".  Without timing
/// the line is reproducible across runs.
std::string format_criterion_line(const CriterionResult& r, bool with_time = true);

}  // namespace medpoc
