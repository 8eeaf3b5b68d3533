#pragma once

#include <cstddef>
#include <vector>

#include "medpoc/ordered_data.hpp"

namespace medpoc {

enum class Strictness { strict, inclusive };

/// Conditional distribution queries consumed by the identification formulas.
///
/// Thresholds at -inf evaluate to 0 and at +inf to 1 under either strictness.
/// Implementations throw PositivityError when a conditioning cell is empty.
class CdfProvider {
 public:
  virtual ~CdfProvider() = default;

  /// P(Y < y | X = x), or P(Y <= y | X = x) when inclusive.
  virtual double cdf_y_given_x(double y, double x, Strictness s) const = 0;
  virtual double cdf_y_given_xm(double y, double x, double m,
                                Strictness s) const = 0;
  /// P(M = m | X = x).
  virtual double mediator_pmf(double m, double x) const = 0;
  /// Mediator levels with positive probability given X = x, ascending.
  virtual std::vector<double> mediator_support(double x) const = 0;
  /// P(Y < y, M < m | X = x) with per-coordinate strictness.
  virtual double joint_cdf_ym_given_x(double y, double m, double x,
                                      Strictness sy, Strictness sm) const = 0;
  /// P(Y < y or M < m | X = x).
  virtual double union_cdf_ym_given_x(double y, double m, double x) const = 0;
  /// sum_m P(Y < y | X = x_base, M = m) P(M = m | X = x_alt).
  virtual double rho(double y, double x_base, double x_alt) const = 0;
};

/// Plug-in estimator over the rows of one (already stratified) dataset.
///
/// Every probability is a ratio of integer counts; rho accumulates
/// count(x_base, m) * n(x_alt, m) / n(x_base, m) before a single division by
/// n(x_alt), so rho(y; x, x) equals cdf_y_given_x(y, x) bit for bit.
class EmpiricalCdf final : public CdfProvider {
 public:
  explicit EmpiricalCdf(const Dataset& d);

  double cdf_y_given_x(double y, double x, Strictness s) const override;
  double cdf_y_given_xm(double y, double x, double m,
                        Strictness s) const override;
  double mediator_pmf(double m, double x) const override;
  std::vector<double> mediator_support(double x) const override;
  double joint_cdf_ym_given_x(double y, double m, double x, Strictness sy,
                              Strictness sm) const override;
  double union_cdf_ym_given_x(double y, double m, double x) const override;
  double rho(double y, double x_base, double x_alt) const override;

  std::vector<double> treatment_support() const;
  std::size_t count(double x) const;
  std::size_t count(double x, double m) const;

 private:
  struct MediatorCell {
    double m;
    std::vector<double> ys;  // sorted
  };
  struct TreatmentCell {
    double x;
    std::vector<double> ys;  // sorted
    std::vector<MediatorCell> cells;  // ascending m
  };

  const TreatmentCell& cell(double x) const;
  const MediatorCell* find(const TreatmentCell& tc, double m) const;

  std::vector<TreatmentCell> cells_;  // ascending x
};

/// Rows of ys strictly below (or at most) y.  ys must be sorted.
std::size_t count_below(const std::vector<double>& ys, double y, Strictness s);

}  // namespace medpoc
