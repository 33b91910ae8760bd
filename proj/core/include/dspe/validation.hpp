// ============================================================================
// validation.hpp -- Monte Carlo harness comparing the detector and estimators
// against their closed forms
//
// Trials run in fixed chunks of kChunkTrials. Chunk c draws from an
// mt19937_64 seeded with seed_seq{lo32(seed), hi32(seed), lo32(c), hi32(c)},
// so results depend only on the master seed and never on the worker count:
// every chunk result is stored and the reduction runs in chunk order.
// ============================================================================
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dspe {

inline constexpr std::uint64_t kChunkTrials = 1024;

struct MonteCarloConfig {
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency
};

[[nodiscard]] std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t chunk);

[[nodiscard]] unsigned resolve_workers(unsigned requested) noexcept;

/// Runs `trials` trials as chunks; `fn(rng, count)` returns a per-chunk
/// accumulator and `acc += part` merges them in chunk order.
template <class Acc, class Fn>
Acc run_chunked(std::uint64_t trials, const MonteCarloConfig& cfg, Fn&& fn) {
  const std::uint64_t chunks = (trials + kChunkTrials - 1) / kChunkTrials;
  std::vector<Acc> parts(chunks);
  auto work = [&](unsigned w, unsigned nw) {
    for (std::uint64_t c = w; c < chunks; c += nw) {
      auto rng = chunk_rng(cfg.seed, c);
      const std::uint64_t count = std::min(kChunkTrials, trials - c * kChunkTrials);
      parts[c] = fn(rng, count);
    }
  };
  const unsigned nw =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(cfg.workers), std::max<std::uint64_t>(1, chunks)));
  if (nw <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work, w, nw);
    for (auto& t : pool) t.join();
  }
  Acc total{};
  for (auto& p : parts) total += p;
  return total;
}

// ---------------------------------------------------------------------------
// Binomial statistics
// ---------------------------------------------------------------------------
struct RateInterval {
  double lower = 0.0;
  double upper = 0.0;
  [[nodiscard]] bool contains(double r) const noexcept { return r >= lower && r <= upper; }
};

/// Central interval of the empirical rate k/n under Binomial(n, p) holding at
/// least `confidence` of the mass (exact quantiles).
[[nodiscard]] RateInterval binomial_acceptance_interval(double p, std::uint64_t n,
                                                        double confidence);

/// Exact (Clopper-Pearson) confidence interval for p after k successes in n.
[[nodiscard]] RateInterval clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence);

/// Trials needed for a `confidence` normal-approximation half-width of
/// `half_width` around rate p.
[[nodiscard]] std::uint64_t required_trials(double p, double half_width, double confidence);

/// Thrown when a suite is asked to run with too few trials.
class UnderpoweredSuite : public std::runtime_error {
 public:
  UnderpoweredSuite(const std::string& suite, std::uint64_t given, std::uint64_t required);
  [[nodiscard]] std::uint64_t required() const noexcept { return required_; }

 private:
  std::uint64_t required_;
};

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::uint64_t trials = 0;
  std::vector<Check> checks;

  [[nodiscard]] bool passed() const noexcept;
};

/// Noise-only samples through both per-sample tests; each empirical false
/// alarm rate must fall inside the exact binomial acceptance interval.
struct PfaSuite {
  double pfa = 1e-4;
  std::uint64_t samples = 10'000'000;
  double confidence = 0.99;
};
[[nodiscard]] SuiteResult run_pfa_suite(const PfaSuite& spec, const MonteCarloConfig& mc);

/// Detection rate at five design points against the closed-form P_D.
struct PdSuite {
  std::uint64_t trials = 100'000;
  double tolerance = 0.01;
};
[[nodiscard]] SuiteResult run_pd_suite(const PdSuite& spec, const MonteCarloConfig& mc);

/// Empirical estimator spread against the closed-form standard deviation.
struct VarianceSuite {
  std::uint64_t trials = 100'000;
  double relative_tolerance = 0.05;
};
[[nodiscard]] SuiteResult run_variance_suite(const VarianceSuite& spec,
                                             const MonteCarloConfig& mc);

/// Error-bound violation rate against delta.
struct CoverageSuite {
  std::uint64_t trials = 100'000;
  double delta = 0.01;
  double confidence = 0.99;
};
[[nodiscard]] SuiteResult run_coverage_suite(const CoverageSuite& spec,
                                             const MonteCarloConfig& mc);

/// Insertion-loss accuracy at 1 min averaging for M = 20 and M = 600.
struct AccuracySuite {
  std::uint64_t runs = 10'000;
  double il_db = 1.24;
  double delta = 0.01;
};
[[nodiscard]] SuiteResult run_accuracy_suite(const AccuracySuite& spec,
                                             const MonteCarloConfig& mc);

/// Dual-wavelength labelling of break, connector and bend archetypes.
struct ClassificationSuite {
  std::uint64_t runs = 1000;  // per archetype
  double dr_db = 25.0;
};
[[nodiscard]] SuiteResult run_classification_suite(const ClassificationSuite& spec,
                                                   const MonteCarloConfig& mc);

/// 1 dB bend hidden in the dead zone of a 17 dB connector reflection.
struct DeadZoneSuite {
  std::uint64_t runs = 1000;
  double min_rate = 0.95;
};
[[nodiscard]] SuiteResult run_dead_zone_suite(const DeadZoneSuite& spec,
                                              const MonteCarloConfig& mc);

/// Threshold test against two-sided competitors |y - (mu0 - c sigma)| > tau,
/// each matched to the same empirical false-alarm rate. c = 0 is the
/// symmetric test; larger c approaches the one-sided optimum.
struct UmpSuite {
  std::uint64_t trials = 100'000;
  double pfa = 1e-2;
  std::vector<double> competitor_offsets_sigma{0.0, 1.0, 3.0};
};
[[nodiscard]] SuiteResult run_ump_suite(const UmpSuite& spec, const MonteCarloConfig& mc);

/// Names accepted by run_suite.
[[nodiscard]] const std::vector<std::string>& suite_names();

/// Runs a named suite with its default parameters, scaled to `trials` when
/// nonzero.
[[nodiscard]] SuiteResult run_suite(const std::string& name, std::uint64_t trials,
                                    const MonteCarloConfig& mc);

}  // namespace dspe
