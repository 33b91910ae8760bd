#include "dspe/classify.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace dspe {

namespace {

std::string fmt_db(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f dB", v);
  return buf;
}

const EstimateResult& at(const FaultEvidence& e, int nm) {
  const auto it = e.il_by_wavelength.find(nm);
  if (it == e.il_by_wavelength.end())
    throw std::invalid_argument("evidence lacks an insertion-loss estimate at " +
                                std::to_string(nm) + " nm");
  return it->second;
}

}  // namespace

const char* to_string(FaultType type) noexcept {
  switch (type) {
    case FaultType::fiber_break: return "break";
    case FaultType::connector_misalignment: return "connector_misalignment";
    case FaultType::fiber_bend: return "fiber_bend";
    case FaultType::unknown: return "unknown";
  }
  return "?";
}

Classification classify(const FaultEvidence& evidence, const ClassifierConfig& rules) {
  const auto& shrt = at(evidence, rules.short_wavelength_nm);
  const auto& lng = at(evidence, rules.long_wavelength_nm);
  const std::string s_nm = std::to_string(rules.short_wavelength_nm) + " nm";
  const std::string l_nm = std::to_string(rules.long_wavelength_nm) + " nm";

  const bool s_break = shrt.value_db >= rules.break_cap_db;
  const bool l_break = lng.value_db >= rules.break_cap_db;
  if (s_break && l_break)
    return {FaultType::fiber_break, "insertion loss >= " + fmt_db(rules.break_cap_db) +
                                        " (break-level) at both wavelengths"};
  if (s_break || l_break)
    return {FaultType::unknown, "break-level insertion loss at only one wavelength"};

  const double diff = lng.value_db - shrt.value_db;
  const double bound = shrt.error_bound_db + lng.error_bound_db;
  const double bend_margin =
      std::max(rules.bend_margin_floor_db, rules.bend_margin_bound_factor * bound);
  const std::string detail = "IL(" + l_nm + ") - IL(" + s_nm + ") = " + fmt_db(diff) +
                             ", combined bound " + fmt_db(bound);

  if (diff > bend_margin) {
    if (!evidence.has_reflection)
      return {FaultType::fiber_bend,
              detail + " exceeds bend margin " + fmt_db(bend_margin) + " with no reflection"};
    return {FaultType::unknown, detail + " looks like a bend but a reflection was detected"};
  }
  if (diff <= rules.connector_slack_db && diff + bound < rules.bend_margin_floor_db)
    return {FaultType::connector_misalignment,
            detail + "; loss is not larger at the longer wavelength"};
  return {FaultType::unknown, detail + " is inconclusive for bend and connector rules"};
}

}  // namespace dspe
