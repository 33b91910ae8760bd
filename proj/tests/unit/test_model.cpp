#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dspe/model.hpp"
#include "dspe/presets.hpp"
#include "oracles.hpp"

using namespace dspe;
using oracle::db10;

namespace {

OtdrConfig noiseless() {
  OtdrConfig o;
  o.pulse_power_w = presets::kPulsePowerW;
  o.pulse_width_s = 100e-9;
  return o;
}

// P0 f_l / N^2 10^(-2 alpha z / 10), written out from the definitions.
double path_scale(const PonTopology& t, const FiberParams& f, double z) {
  const double n = t.split_ratio;
  return presets::kPulsePowerW * db10(-2.0 * t.excess_loss_db) / (n * n) *
         db10(-2.0 * f.attenuation_db_per_km * z / 1000.0);
}

}  // namespace

TEST_CASE("backscatter factor and pulse width at the reference pulse") {
  const auto f = presets::fiber_1550();
  CHECK(backscatter_factor(f, 100e-9) * presets::kPulsePowerW ==
        doctest::Approx(2.00644435544701453e-8).epsilon(1e-13));
  CHECK(backscatter_factor(f, 1e-9) == doctest::Approx(db10(-82.0)).epsilon(1e-14));
  CHECK(spatial_pulse_width_m(f, 100e-9) == doctest::Approx(10.266865).epsilon(1e-12));
  CHECK(backscatter_factor(f, 500e-9) == doctest::Approx(5.0 * backscatter_factor(f, 100e-9)));
  CHECK_THROWS_AS((void)backscatter_factor(f, 0.0), std::invalid_argument);
}

TEST_CASE("round trip attenuation doubles the one-way loss") {
  const auto f = presets::fiber_1550();
  CHECK(round_trip_attenuation(f, 0.0) == 1.0);
  CHECK(round_trip_attenuation(f, 10000.0) == doctest::Approx(db10(-4.2)).epsilon(1e-14));
}

TEST_CASE("plateau sampling rounds the boxcar edges to the grid") {
  const auto r = plateau_samples(8900.0, 10.266865, 0.0, 1.0, 9400);
  CHECK(r.first == 8895);
  CHECK(r.count == 10);
  const auto clipped = plateau_samples(2.0, 10.266865, 0.0, 1.0, 100);
  CHECK(clipped.first == 0);
  CHECK(clipped.end() == 7);
  const auto past = plateau_samples(120.0, 10.0, 0.0, 1.0, 100);
  CHECK(past.count == 0);
}

TEST_CASE("reference trace matches the superposition on the testbed") {
  const auto topo = presets::testbed(32);
  const auto f = presets::fiber_1550();
  const auto o = noiseless();
  const Trace t = reference_trace(topo, f, o);
  const double bt = db10(-82.0) * 100.0;
  REQUIRE(t.size() == 9400);
  CHECK(t.meta.topology_id == "testbed-1x32");

  SUBCASE("two drops active before the first ONT") {
    for (std::size_t i : {0u, 1000u, 2700u, 5000u}) {
      const double z = t.z_at(i);
      CHECK(t.samples_w[i] == doctest::Approx(2.0 * path_scale(topo, f, z) * bt).epsilon(1e-12));
    }
  }
  SUBCASE("one drop active between the ONTs") {
    const double z = 7000.0;
    CHECK(t.samples_w[7000] == doctest::Approx(path_scale(topo, f, z) * bt).epsilon(1e-12));
  }
  SUBCASE("nothing beyond the farthest ONT plateau") {
    CHECK(t.samples_w[9000] == 0.0);
    CHECK(t.samples_w[9399] == 0.0);
  }
  SUBCASE("ONT plateau adds the Fresnel term") {
    const auto plateaus = ont_plateaus(topo, f, o);
    REQUIRE(plateaus.size() == 2);
    const auto& far = plateaus[0];
    CHECK(far.z_ont_m == 8900.0);
    const double ont = path_scale(topo, f, 8900.0) * db10(-37.6);
    for (std::size_t i = far.samples.first; i < far.samples.end(); ++i) {
      const double bs = t.z_at(i) < 8900.0 ? path_scale(topo, f, t.z_at(i)) * bt : 0.0;
      CHECK(t.samples_w[i] == doctest::Approx(ont + bs).epsilon(1e-12));
    }
  }
}

TEST_CASE("faults act only downstream on their own branch") {
  const auto topo = presets::testbed(32);
  const auto f = presets::fiber_1550();
  const auto o = noiseless();
  const Trace ref = reference_trace(topo, f, o);
  FaultSpec fault;
  fault.branch_index = 0;
  fault.position_m = 7000.0;
  fault.insertion_loss_db = {{1550, 1.0}};
  const Trace m = faulted_trace(topo, f, o, fault);
  const double bt = db10(-82.0) * 100.0;

  CHECK(m.samples_w[6999] == ref.samples_w[6999]);
  CHECK(m.samples_w[7500] ==
        doctest::Approx(path_scale(topo, f, 7500.0) * bt * db10(-2.0)).epsilon(1e-12));
  // Branch 1 ends at 5630 m, before the fault; upstream samples are untouched.
  CHECK(m.samples_w[3000] == ref.samples_w[3000]);

  SUBCASE("ONT plateau scales only the ONT reflection") {
    const auto plateaus = ont_plateaus(topo, f, o);
    const std::size_t i = plateaus[0].samples.first + 2;
    const double bs = path_scale(topo, f, m.z_at(i)) * bt;
    const double ont = path_scale(topo, f, 8900.0) * db10(-37.6);
    CHECK(m.samples_w[i] == doctest::Approx(bs + ont * db10(-2.0)).epsilon(1e-12));
  }
  SUBCASE("a break removes the branch backscatter and its ONT reflection") {
    FaultSpec brk = fault;
    brk.insertion_loss_db = {{1550, INFINITY}};
    const Trace b = faulted_trace(topo, f, o, brk);
    CHECK(b.samples_w[7500] == 0.0);
    // On the ONT plateau only the Fresnel term is scaled by the fault.
    CHECK(b.samples_w[8897] ==
          doctest::Approx(path_scale(topo, f, 8897.0) * bt).epsilon(1e-12));
  }
}

TEST_CASE("reflective fault adds its plateau on top of the reference") {
  const auto topo = presets::testbed(32);
  const auto f = presets::fiber_1550();
  const auto o = noiseless();
  const Trace ref = reference_trace(topo, f, o);
  FaultSpec fault;
  fault.position_m = 5650.0;
  fault.return_loss_db = 17.0;
  const Trace m = faulted_trace(topo, f, o, fault);
  const auto plateau = plateau_samples(5650.0, spatial_pulse_width_m(f, 100e-9), 0.0, 1.0, m.size());
  const double term = path_scale(topo, f, 5650.0) * db10(-17.0);
  for (std::size_t i = plateau.first; i < plateau.end(); ++i)
    CHECK(m.samples_w[i] - ref.samples_w[i] == doctest::Approx(term).epsilon(1e-9));
  CHECK(m.samples_w[plateau.end() + 5] == ref.samples_w[plateau.end() + 5]);
}

TEST_CASE("fault validation") {
  const auto topo = presets::testbed(32);
  FaultSpec f;
  f.branch_index = 2;
  CHECK_THROWS_AS(f.validate(topo), std::invalid_argument);
  f.branch_index = 1;
  f.position_m = 6000.0;  // beyond the 5630 m ONT
  CHECK_THROWS_AS(f.validate(topo), std::invalid_argument);
  f.position_m = 1000.0;
  f.return_loss_db = -3.0;
  CHECK_THROWS_AS(f.validate(topo), std::invalid_argument);
  f.return_loss_db.reset();
  f.insertion_loss_db = {{1310, 0.5}};
  CHECK_THROWS_AS((void)f.insertion_loss_at(1550), std::invalid_argument);
  CHECK(FaultSpec{}.insertion_loss_at(1550) == 0.0);
}

TEST_CASE("topology and instrument validation") {
  PonTopology t = presets::testbed(32);
  t.split_ratio = 1;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = presets::testbed(32);
  t.excess_loss_db = -1.0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  const auto f = presets::fiber_1550();
  OtdrConfig o = noiseless();
  o.sample_spacing_m = 20.0;  // coarser than W
  CHECK_THROWS_AS(o.validate(f), std::invalid_argument);
  o = noiseless();
  o.range_m = 100.5;
  CHECK_THROWS_AS(o.validate(f), std::invalid_argument);
  FiberParams bad = f;
  bad.group_index = 2.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("noise is deterministic per seed with the requested spread") {
  const auto topo = presets::testbed(32);
  const auto f = presets::fiber_1550();
  const Trace ref = reference_trace(topo, f, noiseless());
  const double sigma = 3e-12;
  const Trace a = add_noise(ref, sigma, 42);
  const Trace b = add_noise(ref, sigma, 42);
  const Trace c = add_noise(ref, sigma, 43);
  CHECK(a.samples_w == b.samples_w);
  CHECK(a.samples_w != c.samples_w);
  CHECK(a.meta.seed == 42u);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a.samples_w[i] - ref.samples_w[i];
    s += e;
    s2 += e * e;
  }
  const double n = static_cast<double>(a.size());
  CHECK(std::abs(s / n) < 5.0 * sigma / std::sqrt(n));
  CHECK(std::sqrt(s2 / n) == doctest::Approx(sigma).epsilon(0.05));
  CHECK(add_noise(ref, 0.0, 1).samples_w == ref.samples_w);
}

TEST_CASE("averaged reference shrinks the noise by sqrt(R)") {
  const auto topo = presets::testbed(32);
  const auto f = presets::fiber_1550();
  OtdrConfig o = noiseless();
  o.noise_sigma_w = 1e-11;
  const Trace clean = reference_trace(topo, f, o);
  const Trace avg = averaged_reference(topo, f, o, 16, 5);
  double s2 = 0.0;
  for (std::size_t i = 0; i < avg.size(); ++i) {
    const double e = avg.samples_w[i] - clean.samples_w[i];
    s2 += e * e;
  }
  CHECK(std::sqrt(s2 / avg.size()) == doctest::Approx(1e-11 / 4.0).epsilon(0.05));
  CHECK(avg.meta.averaging_label == "mean of 16");
  CHECK_THROWS_AS((void)averaged_reference(topo, f, o, 0, 5), std::invalid_argument);
}
