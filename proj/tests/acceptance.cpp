// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "conjdim/coding.hpp"
#include "conjdim/empirics.hpp"
#include "conjdim/thermo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace conjdim;

namespace {

int g_failed = 0;
int g_threads = 1;

// Reference Hausdorff dimension of the maximal dissonance measure for Salem
// tau = 0.08 against doubling.
constexpr double kSalemDim008 = 0.8107;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what + (cond ? "" : " [miss]");
    ok = ok && cond;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
  const auto t0 = Clock::now();
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", c.ok ? "PASS" : "FAIL", id, title, c.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
  if (!c.ok) ++g_failed;
}

thermo::PairPtr pair_of(const std::string& s, const std::string& t) {
  return std::make_shared<const thermo::PotentialPair>(maps::make_map(s), maps::make_map(t));
}

thermo::BetaProfile profile_of(const std::string& s, const std::string& t, int depth) {
  thermo::SolverSettings ss;
  ss.depth = depth;
  return thermo::BetaProfile::numeric(pair_of(s, t), ss);
}

thermo::DimensionReport report_of(const thermo::BetaProfile& p) {
  thermo::ThermoSettings ts;
  ts.solver = p.settings();
  ts.threads = g_threads;
  return thermo::analyze(p, ts);
}

std::string salem(double tau) { return "salem:tau=" + fmt("%g", tau); }

// Distance on the circle R/Z.
double circle_dist(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

void c1(Check& c) {
  const auto t0 = Clock::now();
  const auto pair = pair_of(salem(0.08), "doubling:d=2");
  thermo::SolverSettings ss;
  ss.depth = 20;
  const auto profile = thermo::BetaProfile::numeric(pair, ss);
  const auto rep = report_of(profile);
  const double numeric = rep.dim_nondiff;
  const double closed = thermo::salem_closed_forms(0.08).dim;
  const double variational = thermo::variational_dim(*pair).dim;
  c.require(std::abs(numeric - kSalemDim008) < 1e-3, fmt("dim %.10f vs 0.8107", numeric));
  const double spread = std::max({std::abs(numeric - closed), std::abs(numeric - variational),
                                  std::abs(closed - variational)});
  c.require(spread < 1e-6, fmt("routes numeric %.12f closed %.12f variational %.12f", numeric, closed, variational) +
                               fmt(" spread %.2e", spread));
  const double secs = seconds_since(t0);
  c.require(secs < 30.0, fmt("runtime %.1f s < 30", secs));
}

void c2(Check& c) {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"salem:tau=0.08", "doubling:d=2"},
      {"salem:tau=0.2", "doubling:d=2"},
      {"salem:tau=0.4", "doubling:d=2"},
      {"doubling:d=2", "salem:tau=0.2"},
      {"doubling:d=3", "custom-pl:breaks=0.2/0.7"},
      {"sine:tau=0.4", "doubling:d=2"},
      {"sine:tau=0.1", "salem:tau=0.3"},
      {"mollified-salem:tau=0.08,n=16", "doubling:d=2"},
  };
  double worst_pl = 0.0, worst_smooth = 0.0;
  for (const auto& [s, t] : pairs) {
    const auto p = profile_of(s, t, 14);
    const double dev = std::max(std::abs(p(0.0) - 1.0), std::abs(p(1.0)));
    double& worst = p.pair()->piecewise_linear() ? worst_pl : worst_smooth;
    worst = std::max(worst, dev);
  }
  c.require(worst_pl < 1e-12, fmt("piecewise-linear max deviation %.2e < 1e-12", worst_pl));
  c.require(worst_smooth < 1e-8, fmt("smooth max deviation %.2e < 1e-8", worst_smooth));
  const double secs = seconds_since(t0);
  c.require(secs < 60.0, fmt("runtime %.1f s < 60", secs));
}

void c3(Check& c) {
  for (double tau : {0.08, 0.2, 0.4}) {
    const double a = thermo::dim_nondiff(profile_of(salem(tau), "doubling:d=2", 20));
    const double b = thermo::dim_nondiff(profile_of("doubling:d=2", salem(tau), 20));
    c.require(std::abs(a - b) < 1e-6, fmt("tau %g: %.12f vs %.12f", tau, a, b));
  }
}

void c4(Check& c) {
  for (const auto& [s, t] : std::vector<std::pair<std::string, std::string>>{
           {"doubling:d=2", "doubling:d=2"}, {"salem:tau=0.2", "salem:tau=0.2"}, {"salem:tau=0.08", "salem:tau=0.08"}}) {
    const auto rep = report_of(profile_of(s, t, 14));
    c.require(rep.verdict == thermo::Verdict::Dependent && rep.dim_nondiff == 0.0 && rep.hoelder_exponent == 1.0,
              s + " vs " + t + ": " + thermo::to_string(rep.verdict) + fmt(" dim %g hoelder %g", rep.dim_nondiff,
                                                                             rep.hoelder_exponent));
  }
  for (double tau : {0.08, 0.2, 0.4}) {
    const auto rep = report_of(profile_of(salem(tau), "doubling:d=2", 14));
    c.require(rep.verdict == thermo::Verdict::Independent && rep.dim_nondiff > 0.0 && rep.dim_nondiff < 1.0,
              salem(tau) + " vs doubling: " + thermo::to_string(rep.verdict) + fmt(" dim %.6f", rep.dim_nondiff));
  }
}

void c5(Check& c) {
  for (const auto& s_text : {std::string("salem:tau=0.2"), std::string("sine:tau=0.4")}) {
    const auto s = maps::make_map(s_text);
    const auto t = maps::make_map("doubling:d=2");
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double xi = u(rng);
      const double lhs = coding::theta(*s, *t, s->forward(xi), 1e-9).value;
      const double rhs = t->forward(coding::theta(*s, *t, xi, 1e-9).value);
      worst = std::max(worst, circle_dist(lhs, rhs));
    }
    c.require(worst < 1e-7, s_text + fmt(" max residual %.2e < 1e-7", worst));
  }
}

void c6(Check& c) {
  const auto pair = pair_of(salem(0.2), "doubling:d=2");
  const auto profile = thermo::BetaProfile::numeric(pair, {});
  const double alpha = thermo::hoelder_exponent(profile).exponent;
  const double expected = 1.0 / std::log2(5.0);
  c.require(std::abs(alpha - expected) < 1e-4, fmt("exponent %.8f vs %.8f", alpha, expected));
  empirics::ProbeSettings ps{1, g_threads};
  const auto below = empirics::s_holder_probe(*pair, alpha - 0.02, 100000, 30, ps);
  c.require(below.violations == 0, fmt("s = exponent - 0.02: %g violations over %g pairs", double(below.violations),
                                       double(below.pairs)));
  const auto above = empirics::s_holder_probe(*pair, alpha + 0.05, 100000, 30, ps);
  const double ratio = std::exp(above.max_log_ratio.at(30) - above.max_log_ratio.at(15));
  c.require(ratio > 10.0, fmt("s = exponent + 0.05: max ratio depth 30 / depth 15 = %.4g > 10", ratio));
}

void c7(Check& c) {
  const auto t0 = Clock::now();
  const double tau = 0.2;
  const auto pair = pair_of(salem(tau), "doubling:d=2");
  empirics::ProbeSettings ps{1, g_threads};
  const auto res = empirics::lebesgue_zero_check(*pair, 500, 25, ps);
  // Lebesgue picks symbol i with the S-cell width; chi_i = log(T width / S width).
  const double mean_chi = tau * std::log(0.5 / tau) + (1.0 - tau) * std::log(0.5 / (1.0 - tau));
  const double rate = std::exp(mean_chi);
  c.require(res.median_final < 1e-2, fmt("median quotient at n=25 %.4g < 1e-2", res.median_final));
  c.require(std::abs(res.fitted_rate / rate - 1.0) < 0.2,
            fmt("decay rate %.5f vs exp(E chi) = %.5f", res.fitted_rate, rate));
  const double secs = seconds_since(t0);
  c.require(secs < 60.0, fmt("runtime %.1f s < 60", secs));
}

void c8(Check& c) {
  const auto profile = profile_of(salem(0.2), "doubling:d=2", 20);
  empirics::ProbeSettings ps{1, g_threads};
  const double s0 = thermo::find_s0(profile);
  const auto osc = empirics::oscillation_check(profile, s0, 100000, 200, 2.0, ps);
  c.require(osc.fraction >= 0.9, fmt("oscillation at s0 = %.6f: fraction %.3f >= 0.9", s0, osc.fraction));
  const auto again = empirics::oscillation_check(profile, s0, 100000, 200, 2.0, ps);
  c.require(again.fraction == osc.fraction, "oscillation rerun identical");
  const auto blow = empirics::blowup_probe(profile, 0.8, 200, 10000, 1e3, ps);
  c.require(blow.fraction >= 0.95, fmt("blow-up at s = 0.8: fraction %.3f >= 0.95 (decaying %.3f, mean chi %.4f)",
                                       blow.fraction, blow.decaying, blow.mean_chi));
}

void c9(Check& c) {
  for (double tau : {0.08, 0.2}) {
    const auto profile = profile_of(salem(tau), "doubling:d=2", 20);
    const auto spec = thermo::lyapunov_spectrum(profile, thermo::spectrum_grid(profile, 201), g_threads);
    double peak = 0.0;
    std::optional<double> at_one;
    for (const auto& p : spec) {
      if (p.dim) peak = std::max(peak, *p.dim);
      if (p.s == 1.0) at_one = p.dim;
    }
    const double s0 = thermo::find_s0(profile);
    const double dim = profile.tilde(s0);
    const auto hat_one = thermo::legendre(profile, 1.0);
    c.require(std::abs(peak - 1.0) < 1e-4, fmt("tau %g: peak %.8f", tau, peak));
    c.require(at_one && std::abs(*at_one - dim) < 1e-6,
              fmt("tau %g: value at 1 %.12f vs dim %.12f", tau, at_one.value_or(NAN), dim));
    c.require(hat_one && std::abs(*hat_one - dim) < 1e-6,
              fmt("tau %g: legendre(1) %.12f vs beta-tilde(s0) %.12f", tau, hat_one.value_or(NAN), dim));
  }
}

void c10(Check& c) {
  const auto t0 = Clock::now();
  const auto tab = empirics::mollify_convergence(0.08, {8, 16, 32, 64}, 14, g_threads);
  std::string widths;
  bool monotone = true;
  double prev = INFINITY;
  for (const auto& r : tab.rows) {
    if (!r.error.empty()) {
      c.require(false, fmt("n=%g: ", r.windows) + r.error);
      continue;
    }
    widths += fmt(" n=%g:%.4f", r.windows, r.bracket_width);
    monotone = monotone && r.bracket_width < prev;
    prev = r.bracket_width;
  }
  const auto& last = tab.rows.back();
  c.require(last.error.empty() && std::abs(last.dim - kSalemDim008) < 0.02,
            fmt("dim at n=64 %.6f vs 0.8107 within 0.02", last.dim));
  c.require(monotone, "bracket widths shrinking:" + widths);
  const double secs = seconds_since(t0);
  c.require(secs < 600.0, fmt("runtime %.1f s < 600", secs));
}

void c11(Check& c) {
  std::vector<double> taus{0.05};
  for (int k = 1; k <= 9; ++k) taus.push_back(0.1 * k);
  const auto tab = empirics::smooth_dependence_sweep(taus, 14, g_threads);
  bool inside = true;
  double d005 = NAN, d04 = NAN;
  std::string dims;
  for (const auto& r : tab.rows) {
    if (!r.error.empty()) {
      c.require(false, fmt("tau %g: ", r.tau) + r.error);
      inside = false;
      continue;
    }
    inside = inside && r.dim > 0.0 && r.dim < 1.0;
    dims += fmt(" %g:%.5f", r.tau, r.dim);
    if (r.tau == 0.05) d005 = r.dim;
    if (std::abs(r.tau - 0.4) < 1e-12) d04 = r.dim;
  }
  c.require(inside, "dim in (0,1):" + dims);
  c.require(d005 < d04, fmt("dim(0.05) %.6f < dim(0.4) %.6f", d005, d04));
  // Second differences over a step of 0.1 stay within 0.1, i.e. |dim''| <= 10.
  c.require(std::isfinite(tab.max_second_difference) && tab.max_second_difference < 0.1,
            fmt("max |second difference| %.4g < 0.1", tab.max_second_difference));
}

} // namespace

int main(int argc, char** argv) {
  g_threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  const std::vector<std::pair<const char*, void (*)(Check&)>> all{
      {"Salem closed form", c1},  {"identities", c2},       {"duality", c3},
      {"dichotomy", c4},          {"functional equation", c5}, {"Hoelder exponent", c6},
      {"singularity", c7},        {"oscillation and blow-up", c8}, {"spectrum shape", c9},
      {"mollification", c10},     {"smooth dependence", c11},
  };
  for (std::size_t i = 0; i < all.size(); ++i)
    if (want(static_cast<int>(i) + 1)) criterion(static_cast<int>(i) + 1, all[i].first, all[i].second);
  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
