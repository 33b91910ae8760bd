#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dspe/classify.hpp"

using namespace dspe;

namespace {

EstimateResult il(double value, double bound) {
  EstimateResult r;
  r.kind = EstimateKind::insertion_loss_backscatter;
  r.value_db = value;
  r.error_bound_db = std::isfinite(value) ? bound : INFINITY;
  r.lower_db = value - bound;
  r.upper_db = value + bound;
  r.break_level = value >= kBreakCapDb;
  return r;
}

FaultEvidence ev(double il1310, double il1550, double bound, bool reflection) {
  FaultEvidence e;
  e.has_reflection = reflection;
  e.il_by_wavelength[1310] = il(il1310, bound);
  e.il_by_wavelength[1550] = il(il1550, bound);
  return e;
}

}  // namespace

TEST_CASE("break needs break-level loss at both wavelengths") {
  CHECK(classify(ev(INFINITY, INFINITY, 0.0, true)).label == FaultType::fiber_break);
  CHECK(classify(ev(16.0, 20.0, 0.5, false)).label == FaultType::fiber_break);
  CHECK(classify(ev(3.0, INFINITY, 0.1, true)).label == FaultType::unknown);
}

TEST_CASE("bend: more loss at the longer wavelength and no reflection") {
  const auto c = classify(ev(0.2, 1.3, 0.02, false));
  CHECK(c.label == FaultType::fiber_bend);
  CHECK(c.rationale.find("bend margin") != std::string::npos);
  CHECK(classify(ev(0.2, 1.3, 0.02, true)).label == FaultType::unknown);
}

TEST_CASE("connector: flat or falling loss with wavelength") {
  CHECK(classify(ev(0.21, 0.14, 0.02, true)).label == FaultType::connector_misalignment);
  CHECK(classify(ev(0.21, 0.14, 0.02, false)).label == FaultType::connector_misalignment);
  CHECK(classify(ev(0.5, 0.6, 0.05, true)).label == FaultType::connector_misalignment);
}

TEST_CASE("wide bounds leave the label unknown") {
  CHECK(classify(ev(0.2, 0.3, 0.2, false)).label == FaultType::unknown);
  // A 0.4 dB rise is a bend only once the bounds are tight enough.
  CHECK(classify(ev(0.2, 0.6, 0.15, false)).label == FaultType::unknown);
  CHECK(classify(ev(0.2, 0.6, 0.05, false)).label == FaultType::fiber_bend);
}

TEST_CASE("missing wavelength is an error") {
  FaultEvidence e;
  e.il_by_wavelength[1550] = il(1.0, 0.1);
  CHECK_THROWS_AS((void)classify(e), std::invalid_argument);
}

TEST_CASE("custom wavelength pair") {
  FaultEvidence e;
  e.il_by_wavelength[1490] = il(0.2, 0.01);
  e.il_by_wavelength[1625] = il(1.5, 0.01);
  ClassifierConfig cfg;
  cfg.short_wavelength_nm = 1490;
  cfg.long_wavelength_nm = 1625;
  CHECK(classify(e, cfg).label == FaultType::fiber_bend);
}

TEST_CASE("property: shrinking the bounds never changes a decided label") {
  for (double s = 0.0; s <= 3.0; s += 0.1) {
    for (double d = -0.6; d <= 1.5; d += 0.05) {
      for (bool refl : {false, true}) {
        for (double bound = 0.4; bound > 0.001; bound *= 0.7) {
          const auto wide = classify(ev(s, s + d, bound, refl)).label;
          if (wide == FaultType::unknown) continue;
          const auto tight = classify(ev(s, s + d, bound * 0.5, refl)).label;
          CAPTURE(s);
          CAPTURE(d);
          CAPTURE(bound);
          CHECK(tight == wide);
        }
      }
    }
  }
}

TEST_CASE("labels have stable names") {
  CHECK(std::string(to_string(FaultType::fiber_break)) == "break");
  CHECK(std::string(to_string(FaultType::connector_misalignment)) == "connector_misalignment");
  CHECK(std::string(to_string(FaultType::fiber_bend)) == "fiber_bend");
  CHECK(std::string(to_string(FaultType::unknown)) == "unknown");
}
