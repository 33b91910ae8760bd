// ============================================================================
// estimate.hpp -- maximum-likelihood event parameters and their error bounds
//
// Each estimator is the log transform of a statistic that is linear in the
// noisy samples (the "starred" variable). The starred error is Gaussian with a
// closed-form variance, so a (1 - delta) interval is built there and mapped
// back through the log to an asymmetric dB interval.
// ============================================================================
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "dspe/model.hpp"

namespace dspe {

inline constexpr double kBreakCapDb = 15.0;

enum class EstimateKind { return_loss, insertion_loss_backscatter, insertion_loss_ont };

struct ErrorModel {
  double sigma_w = 0.0;
  double delta = 0.01;
};

struct EstimateResult {
  EstimateKind kind = EstimateKind::return_loss;
  double value_db = 0.0;
  std::size_t m_used = 0;
  double lower_db = 0.0;  // interval at confidence 1 - delta
  double upper_db = 0.0;  // may be +inf
  double error_bound_db = 0.0;  // max distance from value to either interval end
  double delta = 0.01;
  double starred_value = 0.0;
  double starred_epsilon = 0.0;
  bool break_level = false;  // IL at or above kBreakCapDb
};

/// Raised when the estimator's log argument is not positive; carries it.
class EstimationUndefined : public std::domain_error {
 public:
  EstimationUndefined(const std::string& what, double argument, double epsilon = 0.0)
      : std::domain_error(what), argument_(argument), epsilon_(epsilon) {}
  [[nodiscard]] double argument() const noexcept { return argument_; }
  /// Starred-domain half-width the estimate would have carried.
  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }

 private:
  double argument_;
  double epsilon_;
};

struct StarredBound {
  double std_dev = 0.0;
  double epsilon = 0.0;
};

[[nodiscard]] EstimateResult estimate_return_loss(const Trace& measurement, const Trace& reference,
                                                  std::span<const std::size_t> samples,
                                                  double opl_sq_at_event, double p0_w,
                                                  const ErrorModel& noise);

/// `opl_sq` holds OPL^2(z_m) for each entry of `samples`.
[[nodiscard]] EstimateResult estimate_insertion_loss_backscatter(
    const Trace& measurement, const Trace& reference, std::span<const std::size_t> samples,
    std::span<const double> opl_sq, double p0_w, double backscatter, const ErrorModel& noise);

[[nodiscard]] EstimateResult estimate_insertion_loss_ont(const Trace& measurement,
                                                         const Trace& reference,
                                                         std::span<const std::size_t> samples,
                                                         double opl_sq_at_ont, double rl_ont_db,
                                                         double p0_w, const ErrorModel& noise);

/// epsilon = sqrt(sigma^2 / sum (OPL^2 P0 B)^2) * Qinv(delta/2).
[[nodiscard]] StarredBound insertion_loss_error_bound(std::span<const double> opl_sq, double p0_w,
                                                      double backscatter, double sigma_w,
                                                      double delta);

/// Maps a starred IL estimate x = 10^(-IL/5) - 1 and its epsilon to the dB
/// interval [lower, upper] (upper is +inf once x - eps reaches -1).
struct DbInterval {
  double lower_db = 0.0;
  double upper_db = 0.0;
};
[[nodiscard]] DbInterval insertion_loss_interval(double starred, double epsilon);

/// Result for an IL estimate whose log argument was not positive: value +inf,
/// lower bound from the upper end of the starred interval.
[[nodiscard]] EstimateResult break_level_result(EstimateKind kind, std::size_t m_used,
                                                double argument, double epsilon, double delta);

[[nodiscard]] const char* to_string(EstimateKind kind) noexcept;

}  // namespace dspe
