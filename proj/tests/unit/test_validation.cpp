#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dspe/validation.hpp"

using namespace dspe;

TEST_CASE("binomial acceptance intervals match exact quantiles") {
  const auto a = binomial_acceptance_interval(1e-4, 10'000'000, 0.99);
  CHECK(a.lower == doctest::Approx(9.19e-5).epsilon(1e-12));
  CHECK(a.upper == doctest::Approx(1.082e-4).epsilon(1e-12));
  const auto b = binomial_acceptance_interval(1e-4, 1'000'000, 0.99);
  CHECK(b.lower == doctest::Approx(7.5e-5).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(1.27e-4).epsilon(1e-12));
  const auto c = binomial_acceptance_interval(0.01, 100'000, 0.99);
  CHECK(c.lower == doctest::Approx(0.0092).epsilon(1e-12));
  CHECK(c.upper == doctest::Approx(0.01082).epsilon(1e-12));
  CHECK(c.contains(0.01));
  CHECK_FALSE(c.contains(0.0111));
}

TEST_CASE("Clopper-Pearson intervals") {
  const auto a = clopper_pearson(1000, 10'000'000, 0.99);
  CHECK(a.lower == doctest::Approx(9.204276624237846e-5).epsilon(1e-10));
  CHECK(a.upper == doctest::Approx(1.0843682933813422e-4).epsilon(1e-10));
  const auto b = clopper_pearson(7, 20, 0.95);
  CHECK(b.lower == doctest::Approx(0.15390920478454118).epsilon(1e-10));
  CHECK(b.upper == doctest::Approx(0.5921885345328282).epsilon(1e-10));
  CHECK(clopper_pearson(0, 20, 0.95).lower == 0.0);
  CHECK(clopper_pearson(20, 20, 0.95).upper == 1.0);
}

TEST_CASE("required trials") {
  // z(0.99) = 2.5758293035489008
  CHECK(required_trials(1e-4, 0.5e-4, 0.99) ==
        static_cast<std::uint64_t>(std::ceil(2.5758293035489008 * 2.5758293035489008 * 1e-4 *
                                             (1 - 1e-4) / (0.5e-4 * 0.5e-4))));
  CHECK(required_trials(0.5, 0.01, 0.99) == 16588);
}

TEST_CASE("chunk streams depend only on seed and chunk") {
  auto a = chunk_rng(5, 3);
  auto b = chunk_rng(5, 3);
  auto c = chunk_rng(5, 4);
  auto d = chunk_rng(6, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  CHECK(resolve_workers(3) == 3u);
  CHECK(resolve_workers(0) >= 1u);
}

TEST_CASE("run_chunked is independent of the worker count") {
  auto fn = [](std::mt19937_64& rng, std::uint64_t n) {
    std::normal_distribution<double> g;
    double s = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) s += g(rng);
    return s;
  };
  const double one = run_chunked<double>(50'000, {9, 1}, fn);
  const double four = run_chunked<double>(50'000, {9, 4}, fn);
  const double seven = run_chunked<double>(50'000, {9, 7}, fn);
  CHECK(one == four);
  CHECK(one == seven);
  CHECK(run_chunked<double>(0, {9, 2}, fn) == 0.0);
}

TEST_CASE("suites are reproducible across worker counts") {
  const auto a = run_suite("coverage", 100'000, {3, 1});
  const auto b = run_suite("coverage", 100'000, {3, 3});
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].detail == b.checks[i].detail);
}

TEST_CASE("underpowered runs are refused") {
  try {
    (void)run_suite("pfa", 1000, {1, 1});
    FAIL("expected UnderpoweredSuite");
  } catch (const UnderpoweredSuite& e) {
    CHECK(e.required() > 1000u);
  }
  CHECK_THROWS_AS((void)run_suite("classification", 10, {1, 1}), UnderpoweredSuite);
  CHECK_THROWS_AS((void)run_suite("nope", 0, {1, 1}), std::invalid_argument);
}

TEST_CASE("suite names") {
  const auto& names = suite_names();
  CHECK(names.size() == 8);
  for (const char* n : {"pfa", "pd", "variance", "coverage", "accuracy", "classification",
                        "dead_zone", "ump"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
}

TEST_CASE("UMP suite passes at its default size") {
  const auto r = run_suite("ump", 0, {2, 0});
  CHECK(r.passed());
}
