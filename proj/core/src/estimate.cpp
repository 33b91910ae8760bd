#include "dspe/estimate.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dspe/detect.hpp"

namespace dspe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const Trace& measurement, const Trace& reference,
                  std::span<const std::size_t> samples, const ErrorModel& noise) {
  if (samples.empty()) throw std::invalid_argument("estimation needs at least one sample");
  if (!measurement.same_grid(reference))
    throw std::invalid_argument("measurement and reference grids differ");
  for (const auto i : samples)
    if (i >= measurement.size()) throw std::out_of_range("sample index outside the trace");
  if (!(noise.delta > 0.0 && noise.delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1)");
  if (noise.sigma_w < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
}

double excess_sum(const Trace& measurement, const Trace& reference,
                  std::span<const std::size_t> samples) {
  double s = 0.0;
  for (const auto i : samples) s += measurement.samples_w[i] - reference.samples_w[i];
  return s;
}

double neg5log(double x) { return x > 0.0 ? -5.0 * std::log10(x) : kInf; }
double neg10log(double x) { return x > 0.0 ? -10.0 * std::log10(x) : kInf; }

void finish_bound(EstimateResult& r) {
  r.error_bound_db = std::max(r.value_db - r.lower_db, r.upper_db - r.value_db);
  if (!std::isfinite(r.value_db)) r.error_bound_db = kInf;
}

// Insertion-loss estimators share the starred variable x = 10^(-IL/5) - 1.
EstimateResult il_result(EstimateKind kind, double inner, std::size_t m, double std_dev,
                         double delta) {
  const double eps = std_dev * q_inverse(delta / 2.0);
  if (!(inner > 0.0)) {
    throw EstimationUndefined(
        "insertion-loss estimate undefined: log argument " + std::to_string(inner) +
            " is not positive (loss beyond model validity at this noise level)",
        inner, eps);
  }
  EstimateResult r;
  r.kind = kind;
  r.m_used = m;
  r.delta = delta;
  r.value_db = neg5log(inner);
  r.starred_value = inner - 1.0;
  r.starred_epsilon = eps;
  const auto iv = insertion_loss_interval(r.starred_value, eps);
  r.lower_db = iv.lower_db;
  r.upper_db = iv.upper_db;
  r.break_level = r.value_db >= kBreakCapDb;
  finish_bound(r);
  return r;
}

}  // namespace

const char* to_string(EstimateKind kind) noexcept {
  switch (kind) {
    case EstimateKind::return_loss: return "return_loss";
    case EstimateKind::insertion_loss_backscatter: return "insertion_loss_backscatter";
    case EstimateKind::insertion_loss_ont: return "insertion_loss_ont";
  }
  return "?";
}

DbInterval insertion_loss_interval(double starred, double epsilon) {
  return {neg5log(1.0 + starred + epsilon), neg5log(1.0 + starred - epsilon)};
}

EstimateResult estimate_return_loss(const Trace& measurement, const Trace& reference,
                                    std::span<const std::size_t> samples, double opl_sq_at_event,
                                    double p0_w, const ErrorModel& noise) {
  check_inputs(measurement, reference, samples, noise);
  const double m = static_cast<double>(samples.size());
  const double sum = excess_sum(measurement, reference, samples);
  if (!(sum > 0.0))
    throw EstimationUndefined("return-loss estimate undefined: excess power over the reference is "
                              "not positive (false reflection or wrong samples)",
                              sum);
  const double scale = m * p0_w * opl_sq_at_event;
  const double x = sum / scale;
  const double eps = noise.sigma_w / (std::sqrt(m) * p0_w * opl_sq_at_event) *
                     q_inverse(noise.delta / 2.0);
  EstimateResult r;
  r.kind = EstimateKind::return_loss;
  r.m_used = samples.size();
  r.delta = noise.delta;
  r.value_db = neg10log(x);
  r.starred_value = x;
  r.starred_epsilon = eps;
  r.lower_db = neg10log(x + eps);
  r.upper_db = neg10log(x - eps);
  finish_bound(r);
  return r;
}

StarredBound insertion_loss_error_bound(std::span<const double> opl_sq, double p0_w,
                                        double backscatter, double sigma_w, double delta) {
  if (opl_sq.empty()) throw std::invalid_argument("error bound needs at least one sample");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  double energy = 0.0;
  for (const double o : opl_sq) {
    const double a = o * p0_w * backscatter;
    energy += a * a;
  }
  StarredBound b;
  b.std_dev = std::sqrt(sigma_w * sigma_w / energy);
  b.epsilon = b.std_dev * q_inverse(delta / 2.0);
  return b;
}

EstimateResult estimate_insertion_loss_backscatter(const Trace& measurement,
                                                   const Trace& reference,
                                                   std::span<const std::size_t> samples,
                                                   std::span<const double> opl_sq, double p0_w,
                                                   double backscatter, const ErrorModel& noise) {
  check_inputs(measurement, reference, samples, noise);
  if (opl_sq.size() != samples.size())
    throw std::invalid_argument("one OPL^2 weight is needed per sample");
  double weighted = 0.0;
  double energy = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto i = samples[k];
    weighted += opl_sq[k] * (measurement.samples_w[i] - reference.samples_w[i]);
    energy += opl_sq[k] * opl_sq[k];
  }
  const double inner = weighted / (p0_w * backscatter * energy) + 1.0;
  const double std_dev = noise.sigma_w / (p0_w * backscatter * std::sqrt(energy));
  return il_result(EstimateKind::insertion_loss_backscatter, inner, samples.size(), std_dev,
                   noise.delta);
}

EstimateResult estimate_insertion_loss_ont(const Trace& measurement, const Trace& reference,
                                           std::span<const std::size_t> samples,
                                           double opl_sq_at_ont, double rl_ont_db, double p0_w,
                                           const ErrorModel& noise) {
  check_inputs(measurement, reference, samples, noise);
  const double m = static_cast<double>(samples.size());
  const double level = m * p0_w * opl_sq_at_ont * std::pow(10.0, -rl_ont_db / 10.0);
  const double inner = excess_sum(measurement, reference, samples) / level + 1.0;
  const double std_dev = noise.sigma_w * std::sqrt(m) / level;
  return il_result(EstimateKind::insertion_loss_ont, inner, samples.size(), std_dev, noise.delta);
}

EstimateResult break_level_result(EstimateKind kind, std::size_t m_used, double argument,
                                  double epsilon, double delta) {
  EstimateResult r;
  r.kind = kind;
  r.m_used = m_used;
  r.delta = delta;
  r.value_db = kInf;
  r.starred_value = argument - 1.0;
  r.starred_epsilon = epsilon;
  r.lower_db = neg5log(argument + epsilon);
  r.upper_db = kInf;
  r.error_bound_db = kInf;
  r.break_level = true;
  return r;
}

}  // namespace dspe
