// ============================================================================
// model.hpp -- PON topology, fiber/OTDR parameters and trace synthesis
//
// Traces are sampled on a uniform distance grid and carry linear optical
// power in watts. The reference trace superposes the backscatter of every
// drop fiber whose ONT lies beyond the sample plus the ONT Fresnel plateaus;
// faulted traces add event reflections and insertion-loss deficits on the
// faulty branch.
// ============================================================================
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dspe {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kReferencePulseWidth = 1e-9;    // K is quoted for 1 ns

struct FiberParams {
  double backscatter_db = -82.0;  // K, for a 1 ns pulse
  double attenuation_db_per_km = 0.21;
  double group_index = 1.46;

  void validate() const;
};

struct OtdrConfig {
  double pulse_power_w = 31.8e-3;
  double pulse_width_s = 100e-9;
  double noise_sigma_w = 0.0;  // after averaging; 0 only for noiseless synthesis
  int wavelength_nm = 1550;
  double sample_spacing_m = 1.0;
  std::optional<double> range_m;  // defaults to farthest ONT + 500 m

  void validate(const FiberParams& fiber) const;
};

struct DropBranch {
  double length_m = 0.0;
  double ont_return_loss_db = 40.0;
};

struct PonTopology {
  std::string id = "pon";
  double feeder_length_m = 0.0;
  int split_ratio = 1;
  std::vector<DropBranch> drops;
  double excess_loss_db = 0.0;  // one-way lumped splitter/connector loss

  void validate() const;
  [[nodiscard]] double ont_position_m(std::size_t branch) const;
  [[nodiscard]] double farthest_ont_m() const;
  /// Round-trip linear excess-loss factor f_l.
  [[nodiscard]] double excess_factor() const;
};

/// A fault on one drop branch. `insertion_loss_db` is keyed by wavelength in
/// nm; an empty map means a purely reflective event (0 dB everywhere).
struct FaultSpec {
  std::size_t branch_index = 0;
  double position_m = 0.0;
  std::optional<double> return_loss_db;
  std::map<int, double> insertion_loss_db;

  [[nodiscard]] double insertion_loss_at(int wavelength_nm) const;
  void validate(const PonTopology& topo) const;
};

struct TraceMeta {
  int wavelength_nm = 1550;
  double pulse_width_s = 100e-9;
  std::string averaging_label = "noiseless";
  std::string topology_id;
  std::optional<std::uint64_t> seed;
};

struct Trace {
  double z0_m = 0.0;
  double dz_m = 1.0;
  std::vector<double> samples_w;
  TraceMeta meta;

  [[nodiscard]] std::size_t size() const noexcept { return samples_w.size(); }
  [[nodiscard]] double z_at(std::size_t i) const noexcept {
    return z0_m + static_cast<double>(i) * dz_m;
  }
  [[nodiscard]] bool same_grid(const Trace& other) const noexcept;
};

/// Contiguous run of sample indices [first, first + count).
struct SampleRange {
  std::size_t first = 0;
  std::size_t count = 0;

  [[nodiscard]] std::size_t end() const noexcept { return first + count; }
  [[nodiscard]] bool contains(std::size_t i) const noexcept {
    return i >= first && i < end();
  }
  [[nodiscard]] bool intersects(std::size_t lo, std::size_t hi) const noexcept {
    return count > 0 && lo < end() && hi >= first;  // [lo, hi] inclusive
  }
};

struct OntPlateau {
  std::size_t branch = 0;
  double z_ont_m = 0.0;
  SampleRange samples;
};

/// Linear round-trip backscatter fraction of a pulse of the given width,
/// 10^(K/10) * T / 1 ns.
[[nodiscard]] double backscatter_factor(const FiberParams& fiber, double pulse_width_s);

/// Spatial pulse width W = T * v_g / 2.
[[nodiscard]] double spatial_pulse_width_m(const FiberParams& fiber, double pulse_width_s);

/// One-way fiber attenuation factor applied twice: 10^(-2 alpha z / 10).
[[nodiscard]] double round_trip_attenuation(const FiberParams& fiber, double z_m);

[[nodiscard]] std::size_t sample_count(const PonTopology& topo, const OtdrConfig& otdr);

/// Boxcar plateau of width W centred at z_center, clipped to the grid.
[[nodiscard]] SampleRange plateau_samples(double z_center_m, double width_m, double z0_m,
                                          double dz_m, std::size_t n);

[[nodiscard]] std::vector<OntPlateau> ont_plateaus(const PonTopology& topo,
                                                   const FiberParams& fiber,
                                                   const OtdrConfig& otdr);

[[nodiscard]] Trace reference_trace(const PonTopology& topo, const FiberParams& fiber,
                                    const OtdrConfig& otdr);

[[nodiscard]] Trace faulted_trace(const PonTopology& topo, const FiberParams& fiber,
                                  const OtdrConfig& otdr, std::span<const FaultSpec> faults);

[[nodiscard]] Trace faulted_trace(const PonTopology& topo, const FiberParams& fiber,
                                  const OtdrConfig& otdr, const FaultSpec& fault);

/// Adds independent N(0, sigma^2) draws to every sample. Deterministic per seed.
[[nodiscard]] Trace add_noise(const Trace& trace, double sigma_w, std::uint64_t seed);

/// Mean of `repetitions` noisy syntheses of the reference trace.
[[nodiscard]] Trace averaged_reference(const PonTopology& topo, const FiberParams& fiber,
                                       const OtdrConfig& otdr, int repetitions,
                                       std::uint64_t seed);

}  // namespace dspe
