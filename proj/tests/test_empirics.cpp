#include <doctest.h>

#include "conjdim/coding.hpp"
#include "conjdim/empirics.hpp"
#include "conjdim/errors.hpp"

#include <cmath>

using namespace conjdim;

namespace {

thermo::PairPtr pair_of(const std::string& s, const std::string& t) {
  return std::make_shared<const thermo::PotentialPair>(maps::make_map(s), maps::make_map(t));
}

thermo::BetaProfile salem_profile(double tau) {
  thermo::SolverSettings ss;
  ss.depth = 20;
  return thermo::BetaProfile::numeric(pair_of("salem:tau=" + std::to_string(tau), "doubling:d=2"), ss);
}

} // namespace

TEST_CASE("seed derivation and digit streams are reproducible") {
  CHECK(empirics::mix_seed(1, 0) == empirics::mix_seed(1, 0));
  CHECK(empirics::mix_seed(1, 0) != empirics::mix_seed(1, 1));
  CHECK(empirics::mix_seed(1, 0) != empirics::mix_seed(2, 0));
  const auto p = salem_profile(0.2);
  const auto g = empirics::GibbsSamplerPL::at(p, 0.5, 42);
  const auto a = empirics::sample_gibbs(g, 50, 3);
  const auto b = empirics::sample_gibbs(g, 50, 5);
  for (int i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
  CHECK(a[0] != a[1]);
}

TEST_CASE("Gibbs sampler frequencies follow the weights") {
  const auto p = salem_profile(0.2);
  const auto g = empirics::GibbsSamplerPL::at(p, 0.5, 9);
  const auto digits = empirics::sample_gibbs(g, 200000, 1)[0];
  const double ones = std::count(digits.begin(), digits.end(), 1) / 200000.0;
  CHECK(std::abs(ones - g.weights[0]) < 5.0 * std::sqrt(g.weights[0] * g.weights[1] / 200000.0));
}

TEST_CASE("Gibbs state at s0 has zero mean chi") {
  const auto p = salem_profile(0.2);
  const auto g = empirics::GibbsSamplerPL::at(p, thermo::find_s0(p), 1);
  CHECK(std::abs(g.mean_chi()) < 1e-8);
}

TEST_CASE("sampling needs piecewise-linear pairs") {
  const auto p = thermo::BetaProfile::numeric(pair_of("sine:tau=0.3", "doubling:d=2"));
  CHECK_THROWS_AS(empirics::GibbsSamplerPL::at(p, 0.5, 1), ConfigError);
}

TEST_CASE("probe outputs do not depend on the thread count") {
  const auto p = salem_profile(0.2);
  const double s0 = thermo::find_s0(p);
  const auto a = empirics::oscillation_check(p, s0, 5000, 40, 2.0, {7, 1});
  const auto b = empirics::oscillation_check(p, s0, 5000, 40, 2.0, {7, 3});
  CHECK(a.fraction == b.fraction);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].sum == b.samples[i].sum);
    CHECK(a.samples[i].first_above == b.samples[i].first_above);
  }
  const auto l1 = empirics::lebesgue_zero_check(*p.pair(), 60, 20, {3, 1});
  const auto l4 = empirics::lebesgue_zero_check(*p.pair(), 60, 20, {3, 4});
  CHECK(l1.log_quotients == l4.log_quotients);
  const auto h1 = empirics::s_holder_probe(*p.pair(), 0.5, 2000, 20, {5, 1});
  const auto h2 = empirics::s_holder_probe(*p.pair(), 0.5, 2000, 20, {5, 2});
  CHECK(h1.max_log_ratio == h2.max_log_ratio);
  CHECK(h1.violations == h2.violations);
}

TEST_CASE("one-sided quotients bracket the cylinder quotient") {
  const auto pair = pair_of("salem:tau=0.2", "doubling:d=2");
  const auto g = empirics::GibbsSamplerPL::lebesgue(*pair, 5);
  const auto samples = empirics::sample_gibbs(g, 260, 50);
  for (const auto& digits : samples) {
    for (int n : {3, 10, 25}) {
      const auto [left, right] = empirics::log_one_sided_quotients(*pair, digits, n);
      // (Theta(hi) - Theta(lo)) / (hi - lo) over the level-n cylinder
      const std::span<const int> word(digits.data(), n);
      const double two_sided = coding::log_cylinder_length(pair->t(), word) - coding::log_cylinder_length(pair->s(), word);
      CHECK(std::min(left, right) <= two_sided + 1e-9);
      CHECK(two_sided <= std::max(left, right) + 1e-9);
      const double far = empirics::log_endpoint_quotient(*pair, digits, n);
      CHECK((far == left || far == right));
    }
  }
}

TEST_CASE("blow-up and decay classifications exclude each other") {
  const auto p = salem_profile(0.2);
  const auto blow = empirics::blowup_probe(p, 0.2, 100, 2000, 1e3, {1, 1});
  CHECK(blow.fraction + blow.decaying <= 1.0);
  for (double lq : blow.log_quotients) CHECK_FALSE((lq > std::log(1e3) && lq < std::log(1e-2)));
  const auto leb = empirics::lebesgue_zero_check(*p.pair(), 100, 25, {1, 1});
  for (const auto& row : leb.log_quotients)
    for (double lq : row) CHECK_FALSE((lq > std::log(1e3) && lq < std::log(1e-2)));
}

TEST_CASE("quotients blow up below s0 and decay above it") {
  const auto p = salem_profile(0.2);
  const double s0 = thermo::find_s0(p);
  // Below s0 the equilibrium state has positive mean chi.
  const auto below = empirics::blowup_probe(p, 0.2, 200, 10000, 1e3, {1, 1});
  CHECK(below.mean_chi > 0.0);
  CHECK(below.fraction >= 0.95);
  const auto above = empirics::blowup_probe(p, 0.8, 200, 10000, 1e3, {1, 1});
  CHECK(above.mean_chi < 0.0);
  CHECK(above.decaying >= 0.95);
  CHECK(s0 > 0.2);
  CHECK(s0 < 0.8);
}

TEST_CASE("Lebesgue-typical quotients decay") {
  const auto pair = pair_of("salem:tau=0.3", "doubling:d=2");
  const auto res = empirics::lebesgue_zero_check(*pair, 300, 30, {2, 1});
  for (std::size_t k = 1; k < res.levels.size(); ++k) CHECK(res.levels[k].median < res.levels[k - 1].median);
  const double expected = std::exp(0.3 * std::log(0.5 / 0.3) + 0.7 * std::log(0.5 / 0.7));
  CHECK(res.expected_rate == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("Hoelder probe: dependent pair is bounded, Lipschitz check fails for independent pairs") {
  const auto dep = pair_of("salem:tau=0.3", "salem:tau=0.3");
  const auto d = empirics::s_holder_probe(*dep, 1.0, 5000, 30, {1, 1});
  CHECK(d.violations == 0);
  CHECK(std::abs(d.growth - 1.0) < 1e-9);
  const auto ind = pair_of("salem:tau=0.2", "doubling:d=2");
  const auto u = empirics::s_holder_probe(*ind, 1.0, 5000, 30, {1, 1});
  CHECK(u.growth > 10.0);
  CHECK_THROWS_AS(empirics::s_holder_probe(*ind, 1.5, 10, 30), ConfigError);
}

TEST_CASE("experiment drivers report per-row failures") {
  const auto tab = empirics::mollify_convergence(0.08, {1, 8}, 10, 1);
  REQUIRE(tab.rows.size() == 2);
  CHECK_FALSE(tab.rows[0].error.empty());
  CHECK(tab.rows[1].error.empty());
  CHECK(tab.rows[1].dim > 0.0);
  CHECK(tab.closed_form == doctest::Approx(thermo::salem_closed_forms(0.08).dim));
  CHECK_THROWS_AS(empirics::mollify_convergence(0.08, {16, 8}, 10, 1), ConfigError);

  const auto rows = empirics::salem_sweep({0.1, 0.3, 0.7}, 16, 2);
  for (const auto& r : rows) {
    CHECK(std::abs(r.dim_numeric - r.dim_closed) < 1e-8);
    CHECK(std::abs(r.dim_variational - r.dim_closed) < 1e-8);
  }
  const auto sweep = empirics::smooth_dependence_sweep({0.2, 0.3, 0.4}, 10, 1);
  CHECK(std::isnan(sweep.rows.front().second_difference));
  CHECK(std::isfinite(sweep.rows[1].second_difference));
  CHECK(sweep.max_second_difference == doctest::Approx(std::abs(sweep.rows[1].second_difference)));
}
