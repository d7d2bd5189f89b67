#include <doctest.h>

#include "conjdim/coding.hpp"
#include "conjdim/errors.hpp"

#include <cmath>
#include <random>

using namespace conjdim;

namespace {

// Salem-vs-doubling conjugacy from a hand-rolled digit expansion.
double salem_theta_oracle(double tau, double xi) {
  double value = 0.0, scale = 0.5;
  for (int k = 0; k < 60; ++k) {
    if (xi <= tau) {
      xi /= tau;
    } else {
      value += scale;
      xi = (xi - tau) / (1.0 - tau);
    }
    scale *= 0.5;
  }
  return value;
}

} // namespace

TEST_CASE("encode follows the orbit") {
  const auto s = maps::make_map("salem:tau=0.2");
  // 0.3 -> 0.125 -> 0.625 -> 0.53125
  CHECK(coding::encode(*s, 0.3, 3) == coding::Word{2, 1, 2});
  CHECK(coding::encode(*s, 0.2, 2) == coding::Word{1, 2}); // breakpoint goes left, then 1 -> cell 2
  CHECK(coding::encode(*s, 0.0, 4) == coding::Word{1, 1, 1, 1});
  const auto d3 = maps::make_map("doubling:d=3");
  // 0.5 = 0.111..._3 ; left-cell rule keeps 1/3 in cell 1
  CHECK(coding::encode(*d3, 0.5, 3) == coding::Word{2, 2, 2});
  CHECK(coding::encode(*d3, 1.0 / 3.0, 1) == coding::Word{1});
}

TEST_CASE("cylinders of words") {
  const auto s = maps::make_map("salem:tau=0.2");
  const auto c = coding::cylinder(*s, coding::Word{2, 1});
  CHECK(c.lo == doctest::Approx(0.2));
  CHECK(c.hi == doctest::Approx(0.36));
  CHECK(coding::log_cylinder_length(*s, coding::Word{2, 1}.symbols()) == doctest::Approx(std::log(0.16)));
  CHECK_THROWS_AS(coding::Word({1, 3}).validate(2), ConfigError);
}

TEST_CASE("level-n cylinders partition the interval and contain their points") {
  for (const char* text : {"sine:tau=0.7", "custom-pl:breaks=0.2/0.5", "mollified-salem:tau=0.2,n=8"}) {
    const auto m = maps::make_map(text);
    const int d = m->branches();
    const int n = 6;
    std::vector<int> digits(n, 1);
    double expect_lo = 0.0;
    long count = 0;
    while (true) {
      const auto [lo, hi] = coding::cylinder_bounds(*m, digits);
      CHECK(std::abs(lo - expect_lo) < 1e-12);
      CHECK(hi > lo);
      CHECK(coding::encode(*m, 0.5 * (lo + hi), n) == coding::Word(digits));
      expect_lo = hi;
      ++count;
      int k = n - 1;
      while (k >= 0 && digits[k] == d) digits[k--] = 1;
      if (k < 0) break;
      ++digits[k];
    }
    CHECK(count == static_cast<long>(std::pow(d, n)));
    CHECK(std::abs(expect_lo - 1.0) < 1e-12);
  }
}

TEST_CASE("Salem conjugacy matches the digit-expansion oracle") {
  const auto s = maps::make_map("salem:tau=0.2");
  const auto t = maps::make_map("doubling:d=2");
  CHECK(coding::theta(*s, *t, 0.0, 1e-12).value == 0.0);
  CHECK(coding::theta(*s, *t, 1.0, 1e-12).value == doctest::Approx(1.0));
  CHECK(coding::theta(*s, *t, 0.2, 1e-12).value == doctest::Approx(0.5));
  CHECK(coding::theta(*s, *t, 0.36, 1e-12).value == doctest::Approx(0.75));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double xi = u(rng);
    const auto v = coding::theta(*s, *t, xi, 1e-10);
    CHECK(std::abs(v.value - salem_theta_oracle(0.2, xi)) <= v.error_bound + 1e-12);
    CHECK(v.error_bound <= 1e-10);
  }
}

TEST_CASE("conjugacy is increasing and inverted by the swapped pair") {
  for (const char* text : {"salem:tau=0.3", "sine:tau=0.5"}) {
    const auto s = maps::make_map(text);
    const auto t = maps::make_map("doubling:d=2");
    double prev = -1.0;
    for (int k = 0; k <= 400; ++k) {
      const double xi = k / 400.0;
      const auto th = coding::theta(*s, *t, xi, 1e-11);
      CHECK(th.value >= prev);
      prev = th.value;
      // The inverse is only Hoelder, so push the enclosure through it.
      const auto lo = coding::theta(*t, *s, std::max(0.0, th.value - th.error_bound), 1e-11);
      const auto hi = coding::theta(*t, *s, std::min(1.0, th.value + th.error_bound), 1e-11);
      CHECK(lo.value - lo.error_bound <= xi + 1e-15);
      CHECK(xi <= hi.value + hi.error_bound + 1e-15);
    }
  }
}

TEST_CASE("conjugacy grid CSV") {
  const auto s = maps::make_map("salem:tau=0.2");
  const auto t = maps::make_map("doubling:d=2");
  const auto rows = coding::theta_grid(*s, *t, 6, 1e-9);
  REQUIRE(rows.size() == 6);
  CHECK(rows[1].xi == doctest::Approx(0.2));
  CHECK(rows[1].theta.value == doctest::Approx(0.5));
  const auto csv = coding::theta_csv(rows);
  CHECK(csv.rfind("xi,theta,err\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("difference quotients agree with conjugacy values") {
  const auto s = maps::make_map("sine:tau=0.4");
  const auto t = maps::make_map("doubling:d=2");
  for (double xi : {0.1, 0.45, 0.77}) {
    const double eta = xi + 0.01;
    const auto q = coding::diff_quotient(*s, *t, xi, eta, 1e-12);
    const double direct =
        (coding::theta(*s, *t, xi, 1e-12).value - coding::theta(*s, *t, eta, 1e-12).value) / (xi - eta);
    CHECK(std::abs(q.value - direct) < 1e-8);
    CHECK(q.error_bound < 1e-8);
  }
  CHECK_THROWS_AS(coding::diff_quotient(*s, *t, 0.3, 0.3 + 1e-15, 1e-9), PrecisionError);
}
