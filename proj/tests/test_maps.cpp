#include <doctest.h>

#include "conjdim/errors.hpp"
#include "conjdim/maps.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace conjdim;

namespace {

// Plain bisection on the sine lift, independent of the Newton solver.
double sine_preimage(double tau, int a, double eta) {
  const double target = eta + (a - 1);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = 2.0 * mid + tau / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * mid);
    (f < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("map specs round-trip through their canonical text") {
  for (const char* text : {"salem:tau=0.2", "doubling:d=3", "sine:tau=0.4", "mollified-salem:tau=0.08,n=64",
                           "custom-pl:breaks=0.3/0.7"}) {
    const auto spec = maps::MapSpec::parse(text);
    CHECK(maps::MapSpec::parse(spec.to_string()).to_string() == spec.to_string());
  }
  CHECK(maps::MapSpec::parse("salem:tau=0.20").to_string() == "salem:tau=0.2");
}

TEST_CASE("malformed specs are rejected") {
  CHECK_THROWS_AS(maps::MapSpec::parse("salem"), ConfigError);
  CHECK_THROWS_AS(maps::MapSpec::parse("salem:tau=1.2"), ConfigError);
  CHECK_THROWS_AS(maps::MapSpec::parse("salem:tau=abc"), ConfigError);
  CHECK_THROWS_AS(maps::MapSpec::parse("nope:tau=0.2"), ConfigError);
  CHECK_THROWS_AS(maps::MapSpec::parse("doubling:d=1"), ConfigError);
  CHECK_THROWS_AS(maps::MapSpec::parse("custom-pl:breaks=0.7/0.3"), ConfigError);
  CHECK_THROWS_AS(maps::MapSpec::parse("mollified-salem:tau=0.08,n=0"), ConfigError);
  CHECK_THROWS_AS(maps::make_map("mollified-salem:tau=0.08,n=1"), ConfigError);
}

TEST_CASE("piecewise-linear Salem map") {
  const auto m = maps::make_map("salem:tau=0.2");
  CHECK(m->branches() == 2);
  CHECK(m->piecewise_linear());
  CHECK(m->cell_of(0.0) == 1);
  CHECK(m->cell_of(0.2) == 1); // breakpoint belongs to the left cell
  CHECK(m->cell_of(std::nextafter(0.2, 1.0)) == 2);
  CHECK(m->cell_of(1.0) == 2);
  CHECK(m->forward(0.1) == doctest::Approx(0.5));
  CHECK(m->forward(0.6) == doctest::Approx(0.5));
  CHECK(m->derivative(0.1) == doctest::Approx(5.0));
  CHECK(m->derivative(0.6) == doctest::Approx(1.25));
  CHECK(m->inverse_branch(1, 0.5) == doctest::Approx(0.1));
  CHECK(m->inverse_branch(2, 0.5) == doctest::Approx(0.6));
  CHECK(m->log_inv_deriv(2, 0.3) == doctest::Approx(std::log(0.8)));
  CHECK(m->log_derivative_variation(0.3, 0.9) == 0.0);
}

TEST_CASE("sine inverse branches match a bisection oracle") {
  for (double tau : {0.1, 0.4, 0.9}) {
    const auto m = maps::make_map("sine:tau=" + std::to_string(tau));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const double eta = u(rng);
      for (int a : {1, 2}) {
        const double x = m->inverse_branch(a, eta);
        CHECK(std::abs(x - sine_preimage(tau, a, eta)) < 1e-13);
        CHECK(std::abs(m->forward(x) - eta) < 1e-13);
      }
    }
  }
}

TEST_CASE("inverse branch derivatives agree with finite differences") {
  const auto m = maps::make_map("sine:tau=0.6");
  for (double eta : {0.1, 0.37, 0.8}) {
    for (int a : {1, 2}) {
      const double h = 1e-6;
      const double fd = (m->inverse_branch(a, eta + h) - m->inverse_branch(a, eta - h)) / (2 * h);
      CHECK(m->log_inv_deriv(a, eta) == doctest::Approx(std::log(fd)).epsilon(1e-7));
    }
  }
}

TEST_CASE("log-derivative variation bounds the actual oscillation") {
  for (const char* text : {"sine:tau=0.4", "mollified-salem:tau=0.08,n=16"}) {
    const auto m = maps::make_map(text);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& bp = m->breakpoints();
    for (int i = 0; i < 100; ++i) {
      const std::size_t a = i % 2;
      double lo = bp[a] + (bp[a + 1] - bp[a]) * u(rng), hi = bp[a] + (bp[a + 1] - bp[a]) * u(rng);
      if (lo > hi) std::swap(lo, hi);
      double vmin = INFINITY, vmax = -INFINITY;
      for (int k = 0; k <= 200; ++k) {
        const double v = std::log(m->derivative(lo + (hi - lo) * k / 200.0));
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      CHECK(m->log_derivative_variation(lo, hi) >= vmax - vmin - 1e-12);
    }
  }
}

TEST_CASE("mollified Salem lift has the full-branch shape") {
  const auto m = maps::make_map("mollified-salem:tau=0.08,n=32");
  CHECK(m->branches() == 2);
  CHECK(m->lift(0.0) == doctest::Approx(0.0));
  CHECK(m->lift(1.0) == doctest::Approx(2.0));
  CHECK(m->min_expansion() > 1.0);
  // Away from the windows the slopes keep the Salem ratio.
  CHECK(m->derivative(0.04) / m->derivative(0.5) == doctest::Approx(0.92 / 0.08).epsilon(1e-12));
  CHECK(m->derivative(0.04) / m->derivative(0.03) == doctest::Approx(1.0).epsilon(1e-14));
}
