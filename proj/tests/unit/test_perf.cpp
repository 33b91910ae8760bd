#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dspe/perf.hpp"
#include "dspe/presets.hpp"
#include "oracles.hpp"

using namespace dspe;

namespace {

// Bisection accuracy of the library's design searches.
constexpr double kSearchTol = 0.002;

DesignPoint reflection(double dr, double rl) {
  DesignPoint p;
  p.dr_db = dr;
  p.scenario = ReflectionScenario{rl};
  return p;
}

DesignPoint backscatter(double opl, double il) {
  DesignPoint p;
  p.opl_db = opl;
  p.scenario = BackscatterLossScenario{il};
  return p;
}

DesignPoint ont(double dr, double opl, double il, double rl_ont) {
  DesignPoint p;
  p.dr_db = dr;
  p.opl_db = opl;
  p.scenario = OntLossScenario{il, rl_ont};
  return p;
}

// Largest ONT return loss keeping P_D >= target, by bisection on design_pd.
double rl_ont_crossing(double dr, double opl, double il) {
  double lo = 0.0, hi = 80.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (design_pd(ont(dr, opl, il, mid)) >= 0.95 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("dynamic range conversion") {
  const double pb = presets::kPulsePowerW * dr_reference_backscatter();
  CHECK(pb == doctest::Approx(2.00644435544701453e-8).epsilon(1e-13));
  CHECK(sigma_from_dr(presets::kPulsePowerW, dr_reference_backscatter(), 19.16) ==
        doctest::Approx(2.954113109960197e-12).epsilon(1e-12));
  CHECK(sigma_from_dr(presets::kPulsePowerW, dr_reference_backscatter(), 25.0) ==
        doctest::Approx(2.00644435544701453e-13).epsilon(1e-12));
  CHECK_THROWS_AS((void)dr_from_sigma(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("property: sigma and DR invert each other") {
  for (double dr = 5.0; dr <= 35.0; dr += 2.5) {
    const double s = sigma_from_dr(0.02, 3e-7, dr);
    CHECK(dr_from_sigma(0.02, 3e-7, s) == doctest::Approx(dr).epsilon(1e-13));
  }
}

TEST_CASE("optical path loss") {
  const auto f = presets::fiber_1550();
  PonTopology t = presets::testbed(32);
  const double expected = 2.0 + 15.051499783199059 + 0.21 * 5.65;
  CHECK(opl_db_from_sq(opl_sq(t, f, 5650.0)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(opl_sq_from_db(opl_db_from_sq(0.123)) == doctest::Approx(0.123));
  const auto cal = presets::calibrated_1x16(12.4, 1700.0, f);
  CHECK(opl_db_from_sq(opl_sq(cal, f, 1700.0)) == doctest::Approx(12.4).epsilon(1e-12));
  const auto link = presets::link_for_opl(25.0, 1000.0, 4000.0, f);
  CHECK(opl_db_from_sq(opl_sq(link, f, 1000.0)) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)opl_sq(t, f, -1.0), std::invalid_argument);
}

TEST_CASE("reflection design anchors") {
  auto p = reflection(22.0, 30.0);
  p.opl_db = 35.0;
  CHECK(design_pd(p) == doctest::Approx(0.6033605651033670).epsilon(1e-10));
  CHECK(max_opl(reflection(22.0, 30.0)).value() ==
        doctest::Approx(34.35260873626832).epsilon(kSearchTol / 34.0));
  CHECK(max_opl(reflection(22.0, 50.0)).value() ==
        doctest::Approx(24.35260873626832).epsilon(kSearchTol / 24.0));
}

TEST_CASE("backscatter loss design anchors") {
  CHECK(required_dr(backscatter(15.0, 0.1)).value() ==
        doctest::Approx(25.38097096321439).epsilon(kSearchTol / 25.0));
  CHECK(required_dr(backscatter(15.0, 3.0)).value() ==
        doctest::Approx(19.27552915119076).epsilon(kSearchTol / 19.0));
  CHECK(required_dr(backscatter(19.1, 1.0)).value() ==
        doctest::Approx(24.91200843041292).epsilon(kSearchTol / 24.0));
  CHECK(required_dr(backscatter(22.2, 1.0)).value() ==
        doctest::Approx(28.01200843041292).epsilon(kSearchTol / 28.0));
}

TEST_CASE("ONT plateau design anchors") {
  CHECK(rl_ont_crossing(25.0, 25.0, 0.1) == doctest::Approx(41.23805807357122).epsilon(1e-9));
  CHECK(rl_ont_crossing(15.0, 25.0, 0.1) == doctest::Approx(21.23805807357122).epsilon(1e-9));
  auto bs = backscatter(0.0, 1.0);
  bs.dr_db = 20.0;
  const double gain = *max_opl(ont(20.0, 0.0, 1.0, 40.0)) - *max_opl(bs);
  CHECK(gain == doctest::Approx(11.0).epsilon(kSearchTol / 11.0));
}

TEST_CASE("infeasible designs report no value") {
  CHECK_FALSE(max_opl(reflection(1.0, 70.0)).has_value());
  CHECK_FALSE(required_dr(backscatter(50.0, 0.01)).has_value());
  CHECK(required_dr(ont(0.0, 0.0, 10.0, 10.0)).value() == 0.0);
  CHECK(max_opl(reflection(60.0, 10.0)).value() == 60.0);
}

TEST_CASE("design point validation") {
  auto p = reflection(20.0, 30.0);
  p.pfa = 0.99;
  CHECK_THROWS_AS((void)design_pd(p), std::invalid_argument);
  p = reflection(0.0, 30.0);
  CHECK_THROWS_AS((void)design_pd(p), std::invalid_argument);
  p = backscatter(10.0, -1.0);
  CHECK_THROWS_AS((void)design_pd(p), std::invalid_argument);
}

TEST_CASE("sweep tabulation") {
  SweepSpec s;
  s.base = reflection(20.0, 30.0);
  s.variable = SweepVariable::opl;
  s.from = 10.0;
  s.to = 12.0;
  s.step = 0.5;
  const auto pts = sweep(s);
  REQUIRE(pts.size() == 5);
  CHECK(pts.back().x == 12.0);
  for (const auto& c : pts) {
    auto p = s.base;
    p.opl_db = c.x;
    CHECK(*c.y == design_pd(p));
  }
  s.from = 13.0;
  CHECK(sweep(s).empty());
  s.step = 0.0;
  CHECK_THROWS_AS((void)sweep(s), std::invalid_argument);
  s.step = 1.0;
  s.from = 0.0;
  s.variable = SweepVariable::rl_ont;
  CHECK_THROWS_AS((void)sweep(s), std::invalid_argument);
}

TEST_CASE("property: P_D is monotone in DR, OPL and event strength") {
  double prev = 0.0;
  for (double dr = 10.0; dr <= 30.0; dr += 1.0) {
    const double pd = design_pd(reflection(dr, 30.0));
    CHECK(pd >= prev);
    prev = pd;
  }
  prev = 1.0;
  for (double opl = 5.0; opl <= 40.0; opl += 1.0) {
    auto p = backscatter(opl, 1.0);
    p.dr_db = 25.0;
    const double pd = design_pd(p);
    CHECK(pd <= prev);
    prev = pd;
  }
  prev = 0.0;
  for (double il = 0.05; il <= 5.0; il += 0.25) {
    const double pd = design_pd(ont(20.0, 20.0, il, 40.0));
    CHECK(pd >= prev);
    prev = pd;
  }
}

TEST_CASE("property: max_opl and required_dr are transposes") {
  for (double dr : {16.0, 20.0, 24.0, 28.0}) {
    for (double rl : {20.0, 30.0, 45.0}) {
      const auto opl = max_opl(reflection(dr, rl));
      if (!opl || *opl >= 60.0) continue;
      auto p = reflection(0.0, rl);
      p.opl_db = *opl;
      const auto back = required_dr(p);
      REQUIRE(back.has_value());
      CAPTURE(dr);
      CAPTURE(rl);
      CHECK(std::abs(*back - dr) < 0.01);
    }
  }
}

TEST_CASE("property: each extra dB of DR buys one dB of OPL") {
  const double a = *max_opl(reflection(20.0, 30.0));
  const double b = *max_opl(reflection(24.0, 30.0));
  CHECK(std::abs((b - a) - 4.0) < kSearchTol);
}
