#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dspe/analysis.hpp"
#include "dspe/presets.hpp"

using namespace dspe;

namespace {

AnalysisSetup testbed_setup(double dr) {
  AnalysisSetup s;
  s.topology = presets::testbed(32);
  s.fiber = presets::fiber_1550();
  s.otdr = presets::otdr_for_dr(dr);
  return s;
}

std::vector<FaultSpec> connector(double rl, double il) {
  FaultSpec f;
  f.position_m = 5650.0;
  f.return_loss_db = rl;
  f.insertion_loss_db = {{1550, il}};
  return {f};
}

}  // namespace

TEST_CASE("connector on the testbed: reflection, loss and ONT estimates") {
  const auto s = testbed_setup(24.9);
  const Trace ref = reference_trace(s.topology, s.fiber, s.otdr);
  const auto faults = connector(17.0, 1.2);
  const Trace m = add_noise(faulted_trace(s.topology, s.fiber, s.otdr, faults),
                            s.otdr.noise_sigma_w, 2024);
  const auto a = analyze_trace(ref, m, s);
  CHECK(a.samples == ref.size());
  CHECK(a.family_wise_pfa ==
        doctest::Approx(-std::expm1(ref.size() * 2.0 * std::log1p(-1e-4))).epsilon(1e-12));

  const auto min = significant_event_samples(s.fiber, s.otdr);
  CHECK(min == 5);
  const auto pf = primary_fault(a, min, 10, s.test.gap_tolerance_samples);
  REQUIRE(pf.loss_event.has_value());
  REQUIRE(pf.reflection_event.has_value());

  const auto& refl = a.events[*pf.reflection_event];
  CHECK(refl.event.start_m == doctest::Approx(5645.0).epsilon(1e-3));
  REQUIRE(refl.return_loss.has_value());
  // The event centre is known only to the sample grid; OPL^2 there is off by
  // up to alpha * dz round trip, which dominates the noise bound of a strong
  // reflection.
  const double quantisation_db = s.fiber.attenuation_db_per_km * s.otdr.sample_spacing_m / 1000.0;
  CHECK(std::abs(refl.return_loss->value_db - 17.0) <=
        refl.return_loss->error_bound_db + quantisation_db);

  const auto& loss = a.events[*pf.loss_event];
  CHECK(loss.event.first >= refl.event.first);
  REQUIRE(loss.il_backscatter.has_value());
  CHECK(loss.il_backscatter->lower_db <= 1.2);
  CHECK(loss.il_backscatter->upper_db >= 1.2);
  REQUIRE(loss.event.branch_hint == 0u);
  REQUIRE(loss.il_ont.has_value());
  CHECK(std::abs(loss.il_ont->value_db - 1.2) < loss.il_ont->error_bound_db);
  const auto best = best_insertion_loss(loss);
  REQUIRE(best.has_value());
  CHECK(best->error_bound_db <= loss.il_backscatter->error_bound_db);
}

TEST_CASE("clean trace yields no significant events") {
  const auto s = testbed_setup(24.9);
  const Trace ref = reference_trace(s.topology, s.fiber, s.otdr);
  const Trace m = add_noise(ref, s.otdr.noise_sigma_w, 3);
  const auto a = analyze_trace(ref, m, s);
  const auto pf = primary_fault(a, significant_event_samples(s.fiber, s.otdr), 10, 2);
  CHECK_FALSE(pf.loss_event.has_value());
  CHECK_FALSE(pf.reflection_event.has_value());
  const TraceAnalysis both[] = {a};
  CHECK_FALSE(collect_evidence(both, 5, 10, 2).has_value());
}

TEST_CASE("a break is reported at break level") {
  auto s = testbed_setup(24.9);
  const Trace ref = reference_trace(s.topology, s.fiber, s.otdr);
  FaultSpec f;
  f.position_m = 7000.0;
  f.return_loss_db = 14.7;
  f.insertion_loss_db = {{1550, INFINITY}};
  const Trace m = add_noise(faulted_trace(s.topology, s.fiber, s.otdr, f), s.otdr.noise_sigma_w, 9);
  const auto a = analyze_trace(ref, m, s);
  const auto pf = primary_fault(a, 5, 10, 2);
  REQUIRE(pf.loss_event.has_value());
  const auto il = best_insertion_loss(a.events[*pf.loss_event]);
  REQUIRE(il.has_value());
  CHECK(il->value_db >= kBreakCapDb);
  CHECK(il->break_level);
}

TEST_CASE("dual-wavelength bend is classified") {
  const auto f1550 = presets::fiber_1550();
  const auto topo = presets::calibrated_1x16(15.0, 3000.0, f1550);
  std::vector<TraceAnalysis> analyses;
  for (int nm : {1310, 1550}) {
    AnalysisSetup s;
    s.topology = topo;
    s.fiber = nm == 1310 ? presets::fiber_1310() : f1550;
    s.otdr = presets::otdr_for_dr(25.0, nm);
    FaultSpec f;
    f.position_m = 3000.0;
    f.insertion_loss_db = {{1310, 0.2}, {1550, 1.3}};
    const Trace ref = reference_trace(s.topology, s.fiber, s.otdr);
    const Trace m = add_noise(faulted_trace(s.topology, s.fiber, s.otdr, f), s.otdr.noise_sigma_w,
                              static_cast<std::uint64_t>(nm));
    analyses.push_back(analyze_trace(ref, m, s));
  }
  const auto ev = collect_evidence(analyses, 5, 10, 2);
  REQUIRE(ev.has_value());
  CHECK_FALSE(ev->has_reflection);
  CHECK(ev->il_by_wavelength.count(1310) == 1);
  CHECK(classify(*ev).label == FaultType::fiber_bend);
}

TEST_CASE("best insertion loss prefers a break-level interval") {
  EventAnalysis ev;
  EstimateResult bs;
  bs.value_db = 4.0;
  bs.lower_db = 3.9;
  bs.error_bound_db = 0.1;
  EstimateResult ont;
  ont.value_db = INFINITY;
  ont.lower_db = 18.0;
  ont.error_bound_db = INFINITY;
  ev.il_backscatter = bs;
  CHECK(best_insertion_loss(ev)->value_db == 4.0);
  ev.il_ont = ont;
  CHECK(std::isinf(best_insertion_loss(ev)->value_db));
  CHECK_FALSE(best_insertion_loss(EventAnalysis{}).has_value());
}

TEST_CASE("grid mismatch is rejected") {
  const auto s = testbed_setup(24.9);
  const Trace ref = reference_trace(s.topology, s.fiber, s.otdr);
  Trace m = ref;
  m.samples_w.pop_back();
  CHECK_THROWS_AS((void)analyze_trace(ref, m, s), std::invalid_argument);
}
