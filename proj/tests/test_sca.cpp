#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "secrel/sca.hpp"

using namespace secrel::sca;

TEST_CASE("log tangent: frozen values") {
  const AffineBound b = taylor_log_lower(1.0, 2.0);
  CHECK(b.at(2.0) == doctest::Approx(std::log2(1.5)).epsilon(1e-12));
  CHECK(b.at(4.0) == doctest::Approx(0.10406448).epsilon(1e-6));
  CHECK(std::log2(1.0 + 1.0 / 4.0) >= b.at(4.0));
  CHECK_THROWS_AS(taylor_log_lower(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(taylor_log_lower(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("log tangent: global minorant, tight, right slope") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double p = 10.0 * u01(rng);
    const double ws = 1e-3 + 10.0 * u01(rng);
    const double w = 1e-3 + 10.0 * u01(rng);
    const AffineBound b = taylor_log_lower(p, ws);
    const double truth = std::log2(1.0 + p / w);
    REQUIRE(b.at(w) <= truth + 1e-11 * (1.0 + std::abs(truth)));
  }
  for (int i = 0; i < 200; ++i) {
    const double p = 10.0 * u01(rng) + 0.01;
    const double ws = 0.5 + 10.0 * u01(rng);
    const AffineBound b = taylor_log_lower(p, ws);
    CHECK(b.at(ws) == doctest::Approx(std::log2(1.0 + p / ws)).epsilon(1e-12));
    const double h = 1e-5 * ws;
    const double fd = (std::log2(1.0 + p / (ws + h)) -
                       std::log2(1.0 + p / (ws - h))) / (2.0 * h);
    CHECK(b.coef == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("square tangent: frozen values and global minorant") {
  const AffineBound b = taylor_square_lower(3.0);
  CHECK(b.at(5.0) == doctest::Approx(21.0));
  CHECK(b.at(3.0) == doctest::Approx(9.0));
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 100000; ++i) {
    const double xs = u(rng), x = u(rng);
    REQUIRE(taylor_square_lower(xs).at(x) <= x * x + 1e-9);
  }
  for (int i = 0; i < 200; ++i) {
    const double xs = u(rng);
    const AffineBound t = taylor_square_lower(xs);
    CHECK(t.at(xs) == doctest::Approx(xs * xs).epsilon(1e-12));
    CHECK(t.coef == doctest::Approx(2.0 * xs).epsilon(1e-12));
  }
}

TEST_CASE("dinkelbach update") {
  CHECK(dinkelbach_update(6.0, 3.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(dinkelbach_update(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dinkelbach_update(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("dinkelbach loop on a ratio with a known maximizer") {
  // maximize (2x - x^2)/x = 2 - x over [0.5, 1.5]: optimum 1.5 at x = 0.5.
  auto inner = [](double lambda) {
    // max over the box of 2x - x^2 - lambda x (exact closed form)
    const double xh = std::clamp((2.0 - lambda) / 2.0, 0.5, 1.5);
    InnerOutcome<double> io;
    io.candidate = xh;
    io.num = 2.0 * xh - xh * xh;
    io.den = xh;
    io.F = io.num - lambda * io.den;
    return io;
  };
  const DinkelbachRun<double> run = dinkelbach_loop<double>(
      inner, (2.0 * 1.0 - 1.0) / 1.0, 1e-10, 50);
  REQUIRE(run.converged);
  CHECK(run.lambda_final == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(run.best == doctest::Approx(0.5).epsilon(1e-6));
  for (std::size_t k = 1; k < run.steps.size(); ++k)
    CHECK(run.steps[k].lambda >= run.steps[k - 1].lambda - 1e-12);
  CHECK(std::abs(run.steps.back().F) <= 1e-10);

  // brute-force cross check of the final ratio
  double best = -1e300;
  for (int i = 0; i <= 10000; ++i) {
    const double x = 0.5 + i * (1.0 / 10000.0);
    best = std::max(best, (2.0 * x - x * x) / x);
  }
  CHECK(run.lambda_final == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("dinkelbach rejects bad control parameters") {
  auto inner = [](double) { return InnerOutcome<int>{}; };
  CHECK_THROWS_AS(dinkelbach_loop<int>(inner, 0.0, -1.0, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(dinkelbach_loop<int>(inner, 0.0, 1e-6, 0),
                  std::invalid_argument);
}
