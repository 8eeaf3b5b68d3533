#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medpoc/ecdf.hpp"
#include "medpoc/identify.hpp"
#include "medpoc/ordered_data.hpp"
#include "medpoc/scm.hpp"

namespace medpoc {

/// Draws n iid observational rows (x, m, y, c...).  Deterministic in seed
/// and independent of the OpenMP thread count.
Dataset sample_observational(const Scm& scm, std::size_t n, std::uint64_t seed);
Dataset sample_observational_serial(const Scm& scm, std::size_t n,
                                    std::uint64_t seed);

enum class Method { exact, monte_carlo };

const char* method_name(Method m) noexcept;

struct TruthMethod {
  Method method = Method::exact;
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 0;

  static TruthMethod exact() { return {}; }
  static TruthMethod mc(std::uint64_t n, std::uint64_t seed) {
    return {Method::monte_carlo, n, seed};
  }
};

/// What to do when the evidence event has probability zero.
enum class ZeroMassPolicy {
  error,           // ConditioningError
  boundary_point,  // evaluate at the first exogenous cell past the lower
                   // evidence event in the monotone order (exact only)
};

struct TruthValue {
  std::string name;
  double value = 0.0;
  double se = 0.0;  // zero on the exact path
};

struct TruthReport {
  Method method = Method::exact;
  std::uint64_t samples = 0;    // Monte Carlo draws used (after conditioning)
  CaseFlag case_flag = CaseFlag::unconditional;
  std::vector<TruthValue> values;

  /// Value by name; throws std::out_of_range when absent.
  double at(std::string_view name) const;
  std::optional<double> find(std::string_view name) const;
};

/// Definitional T/ND/NI-PNS (and CD-PNS when q.m_fixed is set).
TruthReport truth_pns(const Scm& scm, const Query& q,
                      const TruthMethod& method = TruthMethod::exact());

/// Definitional quantities conditional on factual evidence: CD-PNS for kind
/// mediator_value, T/ND/NI-PNS for the other kinds.
TruthReport truth_with_evidence(const Scm& scm, const Query& q,
                                const Evidence& e,
                                const TruthMethod& method = TruthMethod::exact(),
                                ZeroMassPolicy policy = ZeroMassPolicy::error);

/// Serial Monte Carlo reference for truth_pns / truth_with_evidence.
TruthReport truth_pns_serial(const Scm& scm, const Query& q,
                             std::uint64_t samples, std::uint64_t seed);
TruthReport truth_with_evidence_serial(const Scm& scm, const Query& q,
                                       const Evidence& e, std::uint64_t samples,
                                       std::uint64_t seed);

/// Mean-scale effects of changing x' to x (exact path only).
struct Effects {
  double te = 0.0;                 // E[Y_x] - E[Y_x']
  std::optional<double> cde;       // E[Y_{x,m}] - E[Y_{x',m}]
  double nde = 0.0;                // E[Y_{x,M_x'}] - E[Y_x']
  double nie = 0.0;                // E[Y_{x',M_x}] - E[Y_x']
  double nie_reverse = 0.0;        // E[Y_{x,M_x'}] - E[Y_x]
};

Effects effects(const Scm& scm, const Query& q);

/// Observational distribution implied by a discrete SCM within one covariate
/// stratum.  cdf_y_given_x is evaluated with the same summation as rho, so
/// rho(y; x, x) equals it bit for bit.
class AnalyticCdf final : public CdfProvider {
 public:
  AnalyticCdf(const Scm& scm, std::vector<double> stratum = {});

  double cdf_y_given_x(double y, double x, Strictness s) const override;
  double cdf_y_given_xm(double y, double x, double m,
                        Strictness s) const override;
  double mediator_pmf(double m, double x) const override;
  std::vector<double> mediator_support(double x) const override;
  double joint_cdf_ym_given_x(double y, double m, double x, Strictness sy,
                              Strictness sm) const override;
  double union_cdf_ym_given_x(double y, double m, double x) const override;
  double rho(double y, double x_base, double x_alt) const override;

 private:
  double mix(double y, double x_outcome, double x_mediator, Strictness s) const;

  Scm scm_;  // owned copy: the provider may outlive its argument
  std::size_t cconf_;
};

struct MonotonicityViolation {
  std::string assumption;  // "4", "4'", "5", "5'", "A1"
  std::string detail;
  double mass_first = 0.0;
  double mass_second = 0.0;
};

/// Exhaustive partition check of the monotonicity assumptions.
///
/// The primed checks compare crossing counterfactual pairs per threshold; the
/// unprimed (structural) checks require every family of lower events to be
/// nested up to null sets, which is what the identification proofs use.
/// A1 adds the mediator events {M_x < s} to the natural family.
struct MonotonicityReport {
  bool assumption4 = true;
  bool assumption4_prime = true;
  bool assumption5 = true;
  bool assumption5_prime = true;
  bool assumption_a1 = true;
  std::vector<MonotonicityViolation> violations;

  bool ok() const noexcept { return assumption4 && assumption5; }
};

/// Checks every covariate stratum of the model.
MonotonicityReport check_monotonicity(const Scm& scm);

}  // namespace medpoc
