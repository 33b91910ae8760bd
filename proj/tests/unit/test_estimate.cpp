#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dspe/detect.hpp"
#include "dspe/estimate.hpp"
#include "dspe/perf.hpp"
#include "dspe/presets.hpp"
#include "oracles.hpp"

using namespace dspe;

namespace {

struct Bench {
  PonTopology topo = presets::testbed(32);
  FiberParams fiber = presets::fiber_1550();
  OtdrConfig otdr = presets::otdr_for_dr(24.9);
  Trace ref = reference_trace(topo, fiber, otdr);
  double bt = backscatter_factor(fiber, otdr.pulse_width_s);
  double w = spatial_pulse_width_m(fiber, otdr.pulse_width_s);

  Trace with(const FaultSpec& f) const { return faulted_trace(topo, fiber, otdr, f); }
  std::vector<double> weights(const std::vector<std::size_t>& idx) const {
    std::vector<double> o;
    for (auto i : idx) o.push_back(opl_sq(topo, fiber, ref.z_at(i)));
    return o;
  }
};

std::vector<std::size_t> span_of(std::size_t first, std::size_t end) {
  std::vector<std::size_t> v(end - first);
  std::iota(v.begin(), v.end(), first);
  return v;
}

FaultSpec loss_at(double z, double il) {
  FaultSpec f;
  f.position_m = z;
  f.insertion_loss_db = {{1550, il}};
  return f;
}

}  // namespace

TEST_CASE("noiseless return loss round trip") {
  const Bench b;
  for (double rl : {17.0, 30.0, 50.0}) {
    FaultSpec f;
    f.position_m = 5650.0;
    f.return_loss_db = rl;
    const auto m = b.with(f);
    const auto pl = plateau_samples(5650.0, b.w, 0.0, 1.0, m.size());
    const auto idx = span_of(pl.first, pl.end());
    const auto r = estimate_return_loss(m, b.ref, idx, opl_sq(b.topo, b.fiber, 5650.0),
                                        b.otdr.pulse_power_w, {b.otdr.noise_sigma_w, 0.01});
    CAPTURE(rl);
    CHECK(std::abs(r.value_db - rl) / rl < 1e-9);
    CHECK(r.m_used == idx.size());
    CHECK(r.kind == EstimateKind::return_loss);
    CHECK(r.lower_db < rl);
    CHECK(r.upper_db > rl);
  }
}

TEST_CASE("noiseless insertion loss round trip in the backscatter") {
  const Bench b;
  for (double il : {0.1, 0.94, 1.18, 1.2, 3.0}) {
    const auto m = b.with(loss_at(5000.0, il));
    const auto idx = span_of(5010, 8880);  // spans both the two-drop and one-drop regions
    const auto r = estimate_insertion_loss_backscatter(m, b.ref, idx, b.weights(idx),
                                                       b.otdr.pulse_power_w, b.bt,
                                                       {b.otdr.noise_sigma_w, 0.01});
    CAPTURE(il);
    CHECK(std::abs(r.value_db - il) / il < 1e-9);
    CHECK(r.starred_value == doctest::Approx(std::pow(10.0, -il / 5.0) - 1.0).epsilon(1e-9));
  }
}

TEST_CASE("noiseless insertion loss round trip on the ONT plateau") {
  const Bench b;
  const auto plateaus = ont_plateaus(b.topo, b.fiber, b.otdr);
  const auto idx = span_of(plateaus[0].samples.first, plateaus[0].samples.end());
  for (double il : {0.1, 0.94, 1.18, 1.2, 3.0}) {
    const auto m = b.with(loss_at(5000.0, il));
    const auto r = estimate_insertion_loss_ont(m, b.ref, idx, opl_sq(b.topo, b.fiber, 8900.0),
                                               37.6, b.otdr.pulse_power_w,
                                               {b.otdr.noise_sigma_w, 0.01});
    CAPTURE(il);
    CHECK(std::abs(r.value_db - il) / il < 1e-9);
    CHECK(r.kind == EstimateKind::insertion_loss_ont);
  }
}

TEST_CASE("starred error bound follows the closed form") {
  const std::vector<double> w{0.5, 0.25, 0.125};
  const double p0 = 0.03, bt = 1e-6, s = 1e-10;
  const auto eb = insertion_loss_error_bound(w, p0, bt, s, 0.01);
  const double energy = (0.25 + 0.0625 + 0.015625) * (p0 * bt) * (p0 * bt);
  CHECK(eb.std_dev == doctest::Approx(s / std::sqrt(energy)).epsilon(1e-13));
  CHECK(eb.epsilon == doctest::Approx(eb.std_dev * 2.5758293035489008).epsilon(1e-13));
  CHECK_THROWS_AS((void)insertion_loss_error_bound({}, p0, bt, s, 0.01), std::invalid_argument);
  CHECK_THROWS_AS((void)insertion_loss_error_bound(w, p0, bt, s, 1.0), std::invalid_argument);
}

TEST_CASE("dB interval is asymmetric and opens to infinity") {
  const double x = std::pow(10.0, -1.0 / 5.0) - 1.0;  // 1 dB
  const auto iv = insertion_loss_interval(x, 0.05);
  CHECK(iv.lower_db == doctest::Approx(-5.0 * std::log10(1.0 + x + 0.05)));
  CHECK(iv.upper_db == doctest::Approx(-5.0 * std::log10(1.0 + x - 0.05)));
  CHECK(iv.upper_db - 1.0 > 1.0 - iv.lower_db);
  CHECK(std::isinf(insertion_loss_interval(-0.9, 0.2).upper_db));
}

TEST_CASE("undefined estimates raise with their argument") {
  const Bench b;
  const auto idx = span_of(100, 120);
  Trace m = b.ref;
  for (auto i : idx) m.samples_w[i] = 0.0;  // deficit larger than the whole backscatter
  for (auto i : idx) m.samples_w[i] -= 1e-9;
  try {
    (void)estimate_insertion_loss_backscatter(m, b.ref, idx, b.weights(idx), b.otdr.pulse_power_w,
                                              b.bt, {b.otdr.noise_sigma_w, 0.01});
    FAIL("expected EstimationUndefined");
  } catch (const EstimationUndefined& e) {
    CHECK(e.argument() < 0.0);
    CHECK(e.epsilon() > 0.0);
  }
  CHECK_THROWS_AS((void)estimate_return_loss(b.ref, b.ref, idx, 0.1, 0.03, {1e-12, 0.01}),
                  EstimationUndefined);
}

TEST_CASE("input validation") {
  const Bench b;
  const std::vector<std::size_t> none;
  const std::vector<std::size_t> out_of_range{b.ref.size()};
  CHECK_THROWS_AS((void)estimate_return_loss(b.ref, b.ref, none, 0.1, 0.03, {1e-12, 0.01}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)estimate_return_loss(b.ref, b.ref, out_of_range, 0.1, 0.03, {1e-12, 0.01}),
                  std::out_of_range);
  const std::vector<std::size_t> one{10};
  CHECK_THROWS_AS((void)estimate_return_loss(b.ref, b.ref, one, 0.1, 0.03, {1e-12, 0.0}),
                  std::invalid_argument);
  const std::vector<double> two{1.0, 1.0};
  CHECK_THROWS_AS((void)estimate_insertion_loss_backscatter(b.ref, b.ref, one, two, 0.03, 1e-6,
                                                            {1e-12, 0.01}),
                  std::invalid_argument);
  Trace other = b.ref;
  other.dz_m = 0.5;
  CHECK_THROWS_AS((void)estimate_return_loss(other, b.ref, one, 0.1, 0.03, {1e-12, 0.01}),
                  std::invalid_argument);
}

TEST_CASE("break-level result") {
  const auto r = break_level_result(EstimateKind::insertion_loss_ont, 10, -0.2, 0.5, 0.01);
  CHECK(std::isinf(r.value_db));
  CHECK(std::isinf(r.upper_db));
  CHECK(r.lower_db == doctest::Approx(-5.0 * std::log10(0.3)));
  CHECK(r.break_level);
  CHECK(std::string(to_string(r.kind)) == "insertion_loss_ont");
}

TEST_CASE("noisy estimate stays inside its bound at the stated rate") {
  const Bench b;
  const auto m = b.with(loss_at(5000.0, 1.0));
  const auto idx = span_of(5010, 5030);
  const auto w = b.weights(idx);
  const double sigma = b.otdr.noise_sigma_w;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, sigma);
  int misses = 0;
  const int runs = 4000;
  const double truth = std::pow(10.0, -1.0 / 5.0) - 1.0;
  for (int k = 0; k < runs; ++k) {
    Trace noisy = m;
    for (auto i : idx) noisy.samples_w[i] += n(rng);
    const auto r = estimate_insertion_loss_backscatter(noisy, b.ref, idx, w, b.otdr.pulse_power_w,
                                                       b.bt, {sigma, 0.05});
    if (std::abs(r.starred_value - truth) > r.starred_epsilon) ++misses;
  }
  // 99.9% binomial acceptance region for n = 4000, p = 0.05.
  CHECK(misses >= 156);
  CHECK(misses <= 247);
}
