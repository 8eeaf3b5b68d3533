#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medpoc/estimator.hpp"
#include "medpoc/ordered_data.hpp"

namespace medpoc {

struct BootstrapConfig {
  std::size_t replicates = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;

  /// Throws UsageError unless replicates >= 2 and 0 < level < 1.
  void validate() const;
};

/// Percentile interval for one reported quantity.
struct CiResult {
  std::string name;
  std::optional<double> point;  // estimate on the full dataset
  std::optional<double> lower;  // absent when no replicate defined the value
  std::optional<double> upper;
  std::optional<double> mean;   // mean of defined replicate values
  std::size_t defined = 0;      // replicates where the value was defined
};

struct BootstrapResult {
  Estimate point;
  std::vector<CiResult> intervals;
  std::size_t replicates = 0;
  std::size_t degenerate_count = 0;  // replicates dropped on positivity errors
};

/// Nonparametric row bootstrap with percentile intervals.
///
/// Replicate r resamples N rows with the substream (seed, r), stratifies and
/// re-runs the estimator.  Results do not depend on the thread count.
BootstrapResult bootstrap_ci(const Dataset& d, const Target& target,
                             const BootstrapConfig& cfg);

/// Single-threaded reference with identical output.
BootstrapResult bootstrap_ci_serial(const Dataset& d, const Target& target,
                                    const BootstrapConfig& cfg);

/// Linear-interpolation quantile of sorted values: h = (n - 1) p,
/// x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace medpoc
