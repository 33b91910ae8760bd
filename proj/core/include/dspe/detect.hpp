// ============================================================================
// detect.hpp -- per-sample Neyman-Pearson reflection and loss tests
//
// Under every hypothesis a sample is Gaussian with the same variance, so the
// likelihood-ratio test reduces to comparing y(z_i) with a threshold placed
// q_inverse(pfa) noise standard deviations away from the reference mean.
// ============================================================================
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dspe/model.hpp"

namespace dspe {

/// Gaussian upper-tail probability Q(x).
[[nodiscard]] double q_function(double x) noexcept;

/// Inverse of Q on (0, 1). Throws std::invalid_argument outside that range.
[[nodiscard]] double q_inverse(double p);

struct TestConfig {
  double pfa_reflection = 1e-4;
  double pfa_loss = 1e-4;
  int gap_tolerance_samples = 2;

  void validate() const;
};

struct ThresholdProfile {
  double z0_m = 0.0;
  double dz_m = 1.0;
  std::vector<double> eta_r_w;
  std::vector<double> eta_l_w;

  [[nodiscard]] std::size_t size() const noexcept { return eta_r_w.size(); }
};

enum class EventKind { reflection, loss };

struct DetectedEvent {
  EventKind kind = EventKind::reflection;
  std::size_t first = 0;  // first flagged sample (leading edge)
  std::size_t last = 0;   // last flagged sample
  double start_m = 0.0;
  double end_m = 0.0;
  std::vector<std::size_t> sample_indices;
  bool on_ont_plateau = false;
  std::optional<std::size_t> branch_hint;
  // Reflection landing on an existing ONT plateau; the model does not cover it.
  bool ambiguous = false;

  [[nodiscard]] std::size_t span() const noexcept { return last - first + 1; }
};

struct DetectionReport {
  std::vector<bool> reflection_flags;
  std::vector<bool> loss_flags;
  std::vector<DetectedEvent> events;

  [[nodiscard]] std::size_t count(EventKind kind) const noexcept;
};

[[nodiscard]] ThresholdProfile thresholds(const Trace& reference, double sigma_w,
                                          const TestConfig& cfg);

/// Runs both tests on every sample and segments flagged runs into events.
/// `plateaus` (optional) marks ONT reflections so events can be attributed to
/// a branch.
[[nodiscard]] DetectionReport run_tests(const Trace& measurement,
                                        const ThresholdProfile& thresholds,
                                        const TestConfig& cfg,
                                        std::span<const OntPlateau> plateaus = {});

/// P_D = Q(Qinv(pfa) - shift/sigma) for a mean shift away from the reference.
[[nodiscard]] double detection_probability(double shift_over_sigma, double pfa);

/// Probability that at least one of `samples` independent tests false-alarms.
[[nodiscard]] double family_wise_false_alarm(double pfa, std::size_t samples);

/// Mean shift of a reflective event: OPL^2 * P0 * 10^(-RL/10).
[[nodiscard]] double reflection_shift_w(double rl_e_db, double opl_sq, double p0_w);

[[nodiscard]] double pd_reflection(double rl_e_db, double opl_sq, const OtdrConfig& otdr,
                                   double pfa);

enum class LossObservation { backscatter, ont_plateau };

/// Where a loss is observed. `backscatter` is B(T) (backscatter observation)
/// and `ont_return_loss_db` is used for ONT-plateau observations.
struct LossSite {
  LossObservation observation = LossObservation::backscatter;
  double opl_sq = 1.0;
  double backscatter = 0.0;
  double ont_return_loss_db = 40.0;
};

/// Mean deficit mu_0 - mu_L caused by an insertion loss at the site.
[[nodiscard]] double loss_shift_w(const LossSite& site, double il_e_db, double p0_w);

[[nodiscard]] double pd_loss(const LossSite& site, double il_e_db, const OtdrConfig& otdr,
                             double pfa);

/// True when the ONT reflection at z_ont exceeds the backscatter at z_i, i.e.
/// observing a loss on the ONT plateau beats observing it in the backscatter.
[[nodiscard]] bool ont_enhancement_holds(const FiberParams& fiber, const OtdrConfig& otdr,
                                         double z_i_m, double z_ont_m, double rl_ont_db);

}  // namespace dspe
