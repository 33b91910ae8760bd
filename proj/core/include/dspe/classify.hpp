// ============================================================================
// classify.hpp -- dual-wavelength fault typing
// ============================================================================
#pragma once

#include <map>
#include <optional>
#include <string>

#include "dspe/estimate.hpp"

namespace dspe {

enum class FaultType { fiber_break, connector_misalignment, fiber_bend, unknown };

struct FaultEvidence {
  bool has_reflection = false;
  std::optional<double> rl_estimate_db;
  std::map<int, EstimateResult> il_by_wavelength;
};

struct ClassifierConfig {
  int short_wavelength_nm = 1310;
  int long_wavelength_nm = 1550;
  double break_cap_db = kBreakCapDb;
  double bend_margin_floor_db = 0.3;
  double bend_margin_bound_factor = 2.0;
  // Allowed excess of IL(long) over IL(short) for a connector.
  double connector_slack_db = 0.15;
};

struct Classification {
  FaultType label = FaultType::unknown;
  std::string rationale;
};

/// Throws std::invalid_argument when either classification wavelength is
/// missing from the evidence.
[[nodiscard]] Classification classify(const FaultEvidence& evidence,
                                      const ClassifierConfig& rules = {});

[[nodiscard]] const char* to_string(FaultType type) noexcept;

}  // namespace dspe
