// ============================================================================
// presets.hpp -- reference parameter sets and the synthetic test networks
// used by the validation suites, scenarios and benchmarks
// ============================================================================
#pragma once

#include <cmath>

#include "dspe/model.hpp"
#include "dspe/perf.hpp"

namespace dspe::presets {

/// Standard single-mode fiber at 1550 nm.
inline FiberParams fiber_1550() { return FiberParams{-82.0, 0.21, 1.46}; }

/// 1310 nm companion: stronger Rayleigh backscatter and attenuation.
inline FiberParams fiber_1310() { return FiberParams{-79.0, 0.35, 1.46}; }

inline constexpr double kPulsePowerW = 31.8e-3;
inline constexpr double kDr1MinDb = 19.16;
inline constexpr double kDr3MinDb = 20.96;

/// OTDR with sigma derived from a dynamic range quoted at 100 ns.
inline OtdrConfig otdr_for_dr(double dr_db, int wavelength_nm = 1550,
                              double pulse_width_s = 100e-9) {
  OtdrConfig o;
  o.pulse_power_w = kPulsePowerW;
  o.pulse_width_s = pulse_width_s;
  o.wavelength_nm = wavelength_nm;
  o.noise_sigma_w = sigma_from_dr(kPulsePowerW, dr_reference_backscatter(), dr_db);
  return o;
}

/// Two-branch field testbed: 2.7 km feeder, drops of 6.2 km and 2.93 km.
inline PonTopology testbed(int split_ratio) {
  PonTopology t;
  t.id = "testbed-1x" + std::to_string(split_ratio);
  t.feeder_length_m = 2700.0;
  t.split_ratio = split_ratio;
  t.drops = {DropBranch{6200.0, 37.6}, DropBranch{2930.0, 49.4}};
  t.excess_loss_db = 2.0;
  return t;
}

/// 1:16 network whose one-way OPL at `event_z_m` on branch 0 equals
/// `opl_db` at the given fiber.
inline PonTopology calibrated_1x16(double opl_db, double event_z_m, const FiberParams& fiber) {
  PonTopology t;
  t.id = "calibrated-1x16";
  t.feeder_length_m = 1000.0;
  t.split_ratio = 16;
  // Branch 0 ends 1 km past the event.
  t.drops = {DropBranch{event_z_m, 40.0}, DropBranch{1500.0, 45.0}};
  t.excess_loss_db =
      opl_db - 10.0 * std::log10(16.0) - fiber.attenuation_db_per_km * event_z_m / 1000.0;
  return t;
}

/// Single-branch link (N = 1) whose one-way OPL at `z_m` equals `opl_db`;
/// the ONT sits at `length_m` (> 500 m).
inline PonTopology link_for_opl(double opl_db, double z_m, double length_m,
                                const FiberParams& fiber, double rl_ont_db = 40.0) {
  PonTopology t;
  t.id = "link";
  t.feeder_length_m = 500.0;
  t.split_ratio = 1;
  t.drops = {DropBranch{length_m - 500.0, rl_ont_db}};
  t.excess_loss_db = opl_db - fiber.attenuation_db_per_km * z_m / 1000.0;
  return t;
}

}  // namespace dspe::presets
