#include "dspe/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace dspe {

double q_function(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace {

// Abramowitz & Stegun 26.2.23 starting point, |error| < 4.5e-4, for p <= 0.5.
double q_inverse_seed(double p) {
  const double t = std::sqrt(-2.0 * std::log(p));
  return t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                 (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
}

// Newton on log Q(x) = log p over the bracket [0, 40], bisecting whenever a
// step leaves the bracket or Q underflows.
double q_inverse_upper(double p) {
  double lo = 0.0;
  double hi = 40.0;
  double x = std::clamp(q_inverse_seed(p), lo, hi);
  const double log_p = std::log(p);
  for (int iter = 0; iter < 200; ++iter) {
    const double q = q_function(x);
    if (q == 0.0) {
      hi = x;
      x = 0.5 * (lo + hi);
      continue;
    }
    if (q > p) lo = x; else hi = x;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const double g = std::log(q) - log_p;
    double next = x + g * q / pdf;  // g' = -pdf/q
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
  }
  return x;
}

}  // namespace

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("q_inverse needs p in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -q_inverse_upper(1.0 - p);
  return q_inverse_upper(p);
}

void TestConfig::validate() const {
  if (!(pfa_reflection > 0.0 && pfa_reflection <= 0.5) || !(pfa_loss > 0.0 && pfa_loss <= 0.5))
    throw std::invalid_argument("false-alarm probabilities must lie in (0, 0.5]");
  if (gap_tolerance_samples < 0) throw std::invalid_argument("gap tolerance must be >= 0");
}

std::size_t DetectionReport::count(EventKind kind) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const auto& e) { return e.kind == kind; }));
}

ThresholdProfile thresholds(const Trace& reference, double sigma_w, const TestConfig& cfg) {
  cfg.validate();
  if (!(sigma_w > 0.0)) throw std::invalid_argument("noise sigma must be positive");
  const double up = sigma_w * q_inverse(cfg.pfa_reflection);
  const double down = sigma_w * q_inverse(cfg.pfa_loss);
  ThresholdProfile out;
  out.z0_m = reference.z0_m;
  out.dz_m = reference.dz_m;
  out.eta_r_w.reserve(reference.size());
  out.eta_l_w.reserve(reference.size());
  for (const double mu0 : reference.samples_w) {
    out.eta_r_w.push_back(mu0 + up);
    out.eta_l_w.push_back(mu0 - down);
  }
  return out;
}

namespace {

void segment(const std::vector<bool>& flags, EventKind kind, int gap, const Trace& grid,
             std::span<const OntPlateau> plateaus, std::vector<DetectedEvent>& out) {
  std::optional<DetectedEvent> cur;
  auto close = [&] {
    if (!cur) return;
    cur->start_m = grid.z_at(cur->first);
    cur->end_m = grid.z_at(cur->last);
    const OntPlateau* hint = nullptr;
    for (const auto& p : plateaus) {
      if (!p.samples.intersects(cur->first, cur->last)) continue;
      cur->on_ont_plateau = true;
      if (p.samples.contains(cur->last) || hint == nullptr ||
          (!hint->samples.contains(cur->last) && p.samples.first > hint->samples.first))
        hint = &p;
    }
    if (hint) cur->branch_hint = hint->branch;
    cur->ambiguous = kind == EventKind::reflection && cur->on_ont_plateau;
    out.push_back(std::move(*cur));
    cur.reset();
  };
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i]) continue;
    if (cur && i - cur->last - 1 > static_cast<std::size_t>(gap)) close();
    if (!cur) {
      cur.emplace();
      cur->kind = kind;
      cur->first = i;
    }
    cur->last = i;
    cur->sample_indices.push_back(i);
  }
  close();
}

}  // namespace

DetectionReport run_tests(const Trace& measurement, const ThresholdProfile& th,
                          const TestConfig& cfg, std::span<const OntPlateau> plateaus) {
  cfg.validate();
  if (measurement.size() != th.size() || measurement.z0_m != th.z0_m || measurement.dz_m != th.dz_m)
    throw std::invalid_argument("measurement grid does not match the threshold grid");
  DetectionReport r;
  const std::size_t n = measurement.size();
  r.reflection_flags.resize(n);
  r.loss_flags.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = measurement.samples_w[i];
    r.reflection_flags[i] = y > th.eta_r_w[i];
    r.loss_flags[i] = y < th.eta_l_w[i];
  }
  segment(r.reflection_flags, EventKind::reflection, cfg.gap_tolerance_samples, measurement,
          plateaus, r.events);
  segment(r.loss_flags, EventKind::loss, cfg.gap_tolerance_samples, measurement, plateaus,
          r.events);
  std::stable_sort(r.events.begin(), r.events.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return r;
}

double detection_probability(double shift_over_sigma, double pfa) {
  return q_function(q_inverse(pfa) - shift_over_sigma);
}

double family_wise_false_alarm(double pfa, std::size_t samples) {
  return -std::expm1(static_cast<double>(samples) * std::log1p(-pfa));
}

double reflection_shift_w(double rl_e_db, double opl_sq, double p0_w) {
  return opl_sq * p0_w * std::pow(10.0, -rl_e_db / 10.0);
}

double pd_reflection(double rl_e_db, double opl_sq, const OtdrConfig& otdr, double pfa) {
  return detection_probability(reflection_shift_w(rl_e_db, opl_sq, otdr.pulse_power_w) /
                                   otdr.noise_sigma_w,
                               pfa);
}

double loss_shift_w(const LossSite& site, double il_e_db, double p0_w) {
  if (il_e_db < 0.0) throw std::invalid_argument("insertion loss must be >= 0");
  const double deficit = -std::expm1(-2.0 * il_e_db / 10.0 * std::numbers::ln10);
  const double level = site.observation == LossObservation::backscatter
                           ? site.backscatter
                           : std::pow(10.0, -site.ont_return_loss_db / 10.0);
  return site.opl_sq * p0_w * level * deficit;
}

double pd_loss(const LossSite& site, double il_e_db, const OtdrConfig& otdr, double pfa) {
  return detection_probability(loss_shift_w(site, il_e_db, otdr.pulse_power_w) / otdr.noise_sigma_w,
                               pfa);
}

bool ont_enhancement_holds(const FiberParams& fiber, const OtdrConfig& otdr, double z_i_m,
                           double z_ont_m, double rl_ont_db) {
  const double backscatter =
      backscatter_factor(fiber, otdr.pulse_width_s) * round_trip_attenuation(fiber, z_i_m);
  const double reflected =
      round_trip_attenuation(fiber, z_ont_m) * std::pow(10.0, -rl_ont_db / 10.0);
  return backscatter < reflected;
}

}  // namespace dspe
