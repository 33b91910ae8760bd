#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "dspe/analysis.hpp"
#include "dspe/detect.hpp"
#include "dspe/estimate.hpp"
#include "dspe/perf.hpp"
#include "dspe/presets.hpp"

using namespace dspe;

namespace {

struct Testbed {
  PonTopology topo = presets::testbed(32);
  FiberParams fiber = presets::fiber_1550();
  OtdrConfig otdr = presets::otdr_for_dr(24.9);
  FaultSpec fault = [] {
    FaultSpec f;
    f.position_m = 5650.0;
    f.return_loss_db = 17.0;
    f.insertion_loss_db = {{1550, 1.2}};
    return f;
  }();
  Trace ref = reference_trace(topo, fiber, otdr);
  Trace meas = add_noise(faulted_trace(topo, fiber, otdr, fault), otdr.noise_sigma_w, 1);
};

const Testbed& bed() {
  static const Testbed b;
  return b;
}

void BM_ReferenceTrace(benchmark::State& st) {
  const auto& b = bed();
  for (auto _ : st) benchmark::DoNotOptimize(reference_trace(b.topo, b.fiber, b.otdr));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(b.ref.size()));
}
BENCHMARK(BM_ReferenceTrace);

void BM_AddNoise(benchmark::State& st) {
  const auto& b = bed();
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(add_noise(b.ref, b.otdr.noise_sigma_w, ++seed));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(b.ref.size()));
}
BENCHMARK(BM_AddNoise);

void BM_RunTests(benchmark::State& st) {
  const auto& b = bed();
  const TestConfig cfg;
  const auto th = thresholds(b.ref, b.otdr.noise_sigma_w, cfg);
  for (auto _ : st) benchmark::DoNotOptimize(run_tests(b.meas, th, cfg));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(b.meas.size()));
}
BENCHMARK(BM_RunTests);

void BM_AnalyzeTrace(benchmark::State& st) {
  const auto& b = bed();
  const AnalysisSetup setup{b.topo, b.fiber, b.otdr, {}, 0.01};
  for (auto _ : st) benchmark::DoNotOptimize(analyze_trace(b.ref, b.meas, setup));
}
BENCHMARK(BM_AnalyzeTrace);

void BM_QInverse(benchmark::State& st) {
  double p = 1e-12;
  for (auto _ : st) {
    benchmark::DoNotOptimize(q_inverse(p));
    p = p < 0.4 ? p * 1.37 : 1e-12;
  }
}
BENCHMARK(BM_QInverse);

void BM_EstimateInsertionLoss(benchmark::State& st) {
  const auto& b = bed();
  std::vector<std::size_t> idx(static_cast<std::size_t>(st.range(0)));
  std::iota(idx.begin(), idx.end(), std::size_t{5660});
  std::vector<double> w;
  for (auto i : idx) w.push_back(opl_sq(b.topo, b.fiber, b.meas.z_at(i)));
  const double bt = backscatter_factor(b.fiber, b.otdr.pulse_width_s);
  for (auto _ : st)
    benchmark::DoNotOptimize(estimate_insertion_loss_backscatter(
        b.meas, b.ref, idx, w, b.otdr.pulse_power_w, bt, {b.otdr.noise_sigma_w, 0.01}));
}
BENCHMARK(BM_EstimateInsertionLoss)->Arg(20)->Arg(600);

void BM_RequiredDr(benchmark::State& st) {
  DesignPoint p;
  p.opl_db = 19.1;
  p.scenario = BackscatterLossScenario{1.0};
  for (auto _ : st) benchmark::DoNotOptimize(required_dr(p));
}
BENCHMARK(BM_RequiredDr);

}  // namespace

BENCHMARK_MAIN();
