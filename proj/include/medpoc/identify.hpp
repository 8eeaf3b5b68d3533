#pragma once

#include <optional>
#include <string>
#include <vector>

#include "medpoc/ecdf.hpp"
#include "medpoc/ordered_data.hpp"

namespace medpoc {

enum class CaseFlag { unconditional, A, B };

const char* case_flag_name(CaseFlag f) noexcept;

/// Total, natural-direct and natural-indirect probabilities of necessity and
/// sufficiency.  t is always computed as nd + ni.
struct PnsTriple {
  double t = 0.0;
  double nd = 0.0;
  double ni = 0.0;
  std::optional<double> prop_nd;  // nd / t, absent when t == 0
  std::optional<double> prop_ni;
  CaseFlag case_flag = CaseFlag::unconditional;
};

/// Intermediate quantities of the evidence formulas.
///
/// For the natural family a, b are P(Y < y | X = x') and P(Y < y | X = x);
/// for the controlled-direct family they are conditional on M = m as well.
struct EvidenceTerms {
  double a = 0.0;
  double b = 0.0;
  double rho = 0.0;
  double l = 0.0;
  double u = 1.0;
  double gamma_t = 0.0;
  double gamma_d = 0.0;
  double gamma_i = 0.0;
  double delta = 1.0;
  double alpha = 0.0;
  double beta = 1.0;
};

struct CdEvidenceResult {
  double value = 0.0;
  CaseFlag case_flag = CaseFlag::A;
  EvidenceTerms terms;
};

struct EvidenceResult {
  PnsTriple triple;
  EvidenceTerms terms;
  std::vector<std::string> warnings;
};

inline constexpr const char* kAssumptionA1Warning =
    "mediator-interval evidence is identified only under monotonicity of the "
    "mediator mechanism jointly with the outcome (lexicographic order on the "
    "exogenous pair); linear and nonlinear additive-noise mediator models "
    "violate it";

// ---------------------------------------------------------------------------
// Closed forms on precomputed probabilities.

/// Natural triple from a = P(Y<y|x'), b = P(Y<y|x), rho.
PnsTriple natural_from_terms(double a, double b, double rho);

/// Natural triple with evidence terms l, u (lower/upper evidence CDFs).
/// Fills gamma_*, delta and picks Case A (delta > 0) or Case B (delta == 0).
PnsTriple natural_with_evidence_from_terms(EvidenceTerms& terms);

/// Controlled-direct value with evidence from a, b (conditional on m), l, u.
CdEvidenceResult cd_with_evidence_from_terms(double a, double b, double l,
                                             double u);

/// Proportions nd/t and ni/t, absent when t == 0.
void fill_proportions(PnsTriple& p);

// ---------------------------------------------------------------------------
// Operations on a distribution model.

/// max{P(Y<y|x',m) - P(Y<y|x,m), 0}.  Requires q.m_fixed.
double cd_pns(const CdfProvider& model, const Query& q);

PnsTriple natural_pns(const CdfProvider& model, const Query& q);

/// Requires q.m_fixed and evidence of kind mediator_value.
CdEvidenceResult cd_pns_with_evidence(const CdfProvider& model, const Query& q,
                                      const Evidence& e);

/// Requires evidence of kind outcome_only.
EvidenceResult natural_pns_with_evidence(const CdfProvider& model,
                                         const Query& q, const Evidence& e);

/// Requires evidence of kind mediator_interval.  Always attaches the
/// kAssumptionA1Warning marker.
EvidenceResult natural_pns_with_mediator_evidence(const CdfProvider& model,
                                                  const Query& q,
                                                  const Evidence& e);

/// Necessity family: evidence (X = x, Y in [y, +inf)).
EvidenceResult pn_family(const CdfProvider& model, const Query& q);

/// Sufficiency family: evidence (X = x', Y in (-inf, y)).
EvidenceResult ps_family(const CdfProvider& model, const Query& q);

Evidence pn_evidence(const Query& q);
Evidence ps_evidence(const Query& q);

}  // namespace medpoc
