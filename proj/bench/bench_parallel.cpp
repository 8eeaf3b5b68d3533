// Serial reference vs OpenMP kernels: bootstrap, Monte Carlo truth, sampling.
#include <benchmark/benchmark.h>

#include "medpoc/estimator.hpp"
#include "medpoc/oracle.hpp"
#include "medpoc/scm.hpp"
#include "medpoc/uncertainty.hpp"

namespace {

using namespace medpoc;

Target preset_target() {
  Target t;
  t.query.x_base = OrderedValue(0.0);
  t.query.x_alt = OrderedValue(1.0);
  t.query.y_threshold = OrderedValue(1.0);
  return t;
}

const Dataset& data_10k() {
  static const Dataset d = sample_observational(Scm::paper_bernoulli(), 10000, 1);
  return d;
}

template <bool Parallel>
void BM_Bootstrap(benchmark::State& state) {
  BootstrapConfig cfg;
  cfg.replicates = static_cast<std::size_t>(state.range(0));
  cfg.seed = 3;
  const Target t = preset_target();
  for (auto _ : state) {
    auto r = Parallel ? bootstrap_ci(data_10k(), t, cfg) : bootstrap_ci_serial(data_10k(), t, cfg);
    benchmark::DoNotOptimize(r.intervals.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_Bootstrap, false)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Bootstrap, true)->Arg(200)->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_MonteCarloTruth(benchmark::State& state) {
  const Scm scm = Scm::paper_bernoulli();
  const Target t = preset_target();
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    auto r = Parallel ? truth_pns(scm, t.query, TruthMethod::mc(n, 5))
                      : truth_pns_serial(scm, t.query, n, 5);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_MonteCarloTruth, false)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_MonteCarloTruth, true)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_Sampling(benchmark::State& state) {
  const Scm scm = Scm::paper_bernoulli();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto d = Parallel ? sample_observational(scm, n, 9) : sample_observational_serial(scm, n, 9);
    benchmark::DoNotOptimize(d.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_Sampling, false)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Sampling, true)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_PointEstimate(benchmark::State& state) {
  const Target t = preset_target();
  for (auto _ : state) {
    auto e = estimate(data_10k(), t);
    benchmark::DoNotOptimize(e.values.data());
  }
}
BENCHMARK(BM_PointEstimate)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
