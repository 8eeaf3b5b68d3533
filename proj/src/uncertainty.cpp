#include "medpoc/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "medpoc/rng.hpp"

namespace medpoc {

void BootstrapConfig::validate() const {
  if (replicates < 2) throw UsageError("bootstrap needs at least 2 replicates");
  if (!(level > 0.0 && level < 1.0)) {
    throw UsageError("confidence level must lie strictly between 0 and 1");
  }
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw BootstrapFailure("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

std::optional<Estimate> replicate(const Dataset& d, const Target& target,
                                  std::uint64_t seed, std::size_t r,
                                  std::vector<std::size_t>& rows) {
  Rng rng(substream_seed(seed, r));
  const std::uint64_t n = d.size();
  for (auto& i : rows) i = static_cast<std::size_t>(rng.below(n));
  try {
    return estimate(d.select(rows), target);
  } catch (const PositivityError&) {
    return std::nullopt;
  }
}

template <bool Parallel>
BootstrapResult run(const Dataset& d, const Target& target,
                    const BootstrapConfig& cfg) {
  cfg.validate();
  BootstrapResult out;
  out.point = estimate(d, target);
  out.replicates = cfg.replicates;

  std::vector<std::optional<Estimate>> reps(cfg.replicates);
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(cfg.replicates);

#pragma omp parallel if (Parallel)
  {
    std::vector<std::size_t> rows(d.size());
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t r = 0; r < count; ++r) {
      try {
        reps[static_cast<std::size_t>(r)] =
            replicate(d, target, cfg.seed, static_cast<std::size_t>(r), rows);
      } catch (...) {
#pragma omp critical(medpoc_bootstrap_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& r : reps) out.degenerate_count += r ? 0 : 1;
  if (out.degenerate_count == cfg.replicates) {
    throw BootstrapFailure("every bootstrap replicate hit an empty conditioning cell");
  }

  const double alpha = (1.0 - cfg.level) / 2.0;
  for (const auto& nv : out.point.values) {
    CiResult ci;
    ci.name = nv.name;
    ci.point = nv.value;
    std::vector<double> vals;
    for (const auto& r : reps) {
      if (!r) continue;
      if (auto v = r->get(nv.name)) vals.push_back(*v);
    }
    ci.defined = vals.size();
    if (!vals.empty()) {
      double sum = 0.0;
      for (double v : vals) sum += v;
      ci.mean = sum / static_cast<double>(vals.size());
      std::sort(vals.begin(), vals.end());
      ci.lower = quantile_sorted(vals, alpha);
      ci.upper = quantile_sorted(vals, 1.0 - alpha);
    }
    out.intervals.push_back(std::move(ci));
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap_ci(const Dataset& d, const Target& target,
                             const BootstrapConfig& cfg) {
  return run<true>(d, target, cfg);
}

BootstrapResult bootstrap_ci_serial(const Dataset& d, const Target& target,
                                    const BootstrapConfig& cfg) {
  return run<false>(d, target, cfg);
}

}  // namespace medpoc
