#include "conjdim/thermo.hpp"

#include "conjdim/errors.hpp"
#include "internal/numfmt.hpp"
#include "internal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace conjdim::thermo {

namespace {

constexpr double kInvPhi = 0.6180339887498949; // (sqrt(5) - 1) / 2

template <class F>
double golden_min(F&& f, double a, double b, double xtol) {
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

} // namespace

BetaProfile BetaProfile::numeric(PairPtr pair, SolverSettings settings) {
  if (!pair) throw ConfigError("beta profile needs a potential pair");
  if (settings.depth < 1) throw ConfigError("depth must be >= 1");
  BetaProfile p;
  p.source_ = BetaSource::Numeric;
  p.pair_ = std::move(pair);
  p.settings_ = settings;
  if (p.pair_->piecewise_linear()) {
    p.phi_ = p.pair_->phi_constants();
    p.psi_ = p.pair_->psi_constants();
  }
  p.cache_ = std::make_shared<Cache>();
  return p;
}

BetaProfile BetaProfile::salem_closed_form(double tau) {
  if (!(tau > 0.0 && tau < 1.0) || tau == 0.5) throw ConfigError("salem tau must lie in (0,1) without 1/2");
  maps::MapSpec ss;
  ss.family = maps::Family::Salem;
  ss.tau = tau;
  maps::MapSpec ts;
  ts.family = maps::Family::Doubling;
  ts.d = 2;
  BetaProfile p;
  p.source_ = BetaSource::ClosedFormSalem;
  p.pair_ = std::make_shared<const PotentialPair>(maps::make_map(ss), maps::make_map(ts));
  p.tau_ = tau;
  p.phi_ = p.pair_->phi_constants();
  p.psi_ = p.pair_->psi_constants();
  p.cache_ = std::make_shared<Cache>();
  return p;
}

double BetaProfile::operator()(double s) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    if (auto it = cache_->values.find(s); it != cache_->values.end()) return it->second;
  }
  // Every solve starts from the same seed, so the value does not depend on the
  // order in which points are requested.
  const double v = source_ == BetaSource::ClosedFormSalem ? SalemClosedForms{tau_}.beta(s)
                                                          : beta_solve(*pair_, s, settings_);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  cache_->values.emplace(s, v);
  return v;
}

std::string BetaProfile::source_name() const {
  return source_ == BetaSource::ClosedFormSalem ? "closed-form-salem" : "numeric";
}

Derivative beta_prime(const BetaProfile& profile, double s) {
  const auto& st = profile.settings();
  const double h = st.fd_step;
  const double noise = st.tol * std::max(1.0, std::abs(s)) / h;
  if (s - h >= st.domain_lo && s + h <= st.domain_hi)
    return {(profile(s + h) - profile(s - h)) / (2.0 * h), noise};
  if (s - 2.0 * h >= st.domain_lo) {
    const double v = (3.0 * profile(s) - 4.0 * profile(s - h) + profile(s - 2.0 * h)) / (2.0 * h);
    return {v, 2.0 * (2.0 * noise + h * h)};
  }
  const double v = (-3.0 * profile(s) + 4.0 * profile(s + h) - profile(s + 2.0 * h)) / (2.0 * h);
  return {v, 2.0 * (2.0 * noise + h * h)};
}

std::vector<double> gibbs_weights(const BetaProfile& profile, double s) {
  if (!profile.bernoulli()) throw ConfigError("Gibbs weights are explicit for piecewise-linear pairs only");
  const auto& phi = profile.phi_constants();
  const auto& psi = profile.psi_constants();
  const double b = profile(s);
  std::vector<double> w(phi.size());
  double top = -INFINITY;
  for (std::size_t i = 0; i < w.size(); ++i) top = std::max(top, s * phi[i] + b * psi[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) z += w[i] = std::exp(s * phi[i] + b * psi[i] - top);
  for (double& x : w) x /= z;
  return w;
}

double beta_prime_gibbs(const BetaProfile& profile, double s) {
  const auto w = gibbs_weights(profile, s);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * profile.phi_constants()[i];
    den += w[i] * profile.psi_constants()[i];
  }
  return -num / den;
}

double find_s0(const BetaProfile& profile) {
  double lo = INFINITY, hi = -INFINITY;
  for (int k = 0; k <= 10; ++k) {
    const double v = profile.tilde(k / 10.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-9) throw DependenceSignal("beta-tilde is flat on [0,1]; the pair looks cohomologically dependent");

  const double guess = golden_min([&](double s) { return profile.tilde(s); }, 0.0, 1.0, 1e-5);

  // Root of beta' + 1 near the golden-section minimiser.
  auto g = [&](double s) {
    if (profile.bernoulli()) return beta_prime_gibbs(profile, s) + 1.0;
    return beta_prime(profile, s).value + 1.0;
  };
  double a = std::max(0.0, guess - 1e-3), b = std::min(1.0, guess + 1e-3);
  double ga = g(a), gb = g(b);
  for (int k = 0; k < 20 && ga * gb > 0.0; ++k) {
    a = std::max(0.0, a - 0.05);
    b = std::min(1.0, b + 0.05);
    ga = g(a);
    gb = g(b);
  }
  if (ga * gb > 0.0) throw ConvergenceError("find_s0: beta' + 1 does not change sign on (0,1)");
  double x = 0.5 * (a + b), gx = g(x);
  for (int it = 0; it < 100 && std::abs(gx) >= 1e-10 && b - a > 1e-15; ++it) {
    if ((gx < 0.0) == (ga < 0.0)) {
      a = x;
      ga = gx;
    } else {
      b = x;
      gb = gx;
    }
    // Secant step, bisected every third iteration.
    double next = a - ga * (b - a) / (gb - ga);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (it % 3 == 2) next = 0.5 * (a + b);
    x = next;
    gx = g(x);
  }
  if (!(std::abs(gx) < 1e-8))
    throw ConvergenceError("find_s0: |beta'(s0) + 1| = " + detail::shortest(std::abs(gx)) + " above 1e-8");
  return x;
}

double dim_nondiff(const BetaProfile& profile) { return profile.tilde(find_s0(profile)); }

namespace {

// Finite differences throughout, so Bernoulli profiles get an independent check.
double neg_slope(const BetaProfile& profile, double s) { return -beta_prime(profile, s).value; }

// log (M^p)'(x) at the periodic point of M whose itinerary is the word.
double periodic_log_derivative(const maps::BranchMap& m, const std::vector<int>& word) {
  if (m.piecewise_linear()) {
    double sum = 0.0;
    for (int a : word) sum -= m.log_width(a);
    return sum;
  }
  double x = 0.5;
  for (int it = 0; it < 200; ++it) {
    double y = x;
    for (auto a = word.rbegin(); a != word.rend(); ++a) y = m.inverse_branch(*a, y);
    const bool done = std::abs(y - x) < 1e-15;
    x = y;
    if (done) break;
  }
  double sum = 0.0;
  for (auto a = word.rbegin(); a != word.rend(); ++a) {
    x = m.inverse_branch(*a, x);
    sum += std::log(m.derivative(x));
  }
  return sum;
}

// Extremes of S_p phi / S_p psi over periodic orbits; every such ratio lies in
// the range of -beta'.
Interval periodic_ratio_range(const PotentialPair& pair, std::size_t max_words) {
  const int d = pair.branches();
  Interval r{INFINITY, -INFINITY};
  std::vector<int> word;
  for (int p = 1;; ++p) {
    if (std::pow(static_cast<double>(d), p) > static_cast<double>(max_words)) break;
    word.assign(static_cast<std::size_t>(p), 1);
    while (true) {
      const double q = periodic_log_derivative(pair.s(), word) / periodic_log_derivative(pair.t(), word);
      r.lo = std::min(r.lo, q);
      r.hi = std::max(r.hi, q);
      std::size_t k = 0;
      while (k < word.size() && word[k] == d) word[k++] = 1;
      if (k == word.size()) break;
      ++word[k];
    }
  }
  return r;
}

Interval sampled_range(const BetaProfile& profile) {
  Interval r{INFINITY, -INFINITY};
  for (double s : {-32.0, -16.0, -8.0, 8.0, 16.0, 32.0}) {
    const double v = neg_slope(profile, s);
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  if (!profile.bernoulli()) {
    const Interval per = periodic_ratio_range(*profile.pair(), 4096);
    r.lo = std::min(r.lo, per.lo);
    r.hi = std::max(r.hi, per.hi);
  }
  return r;
}

} // namespace

Interval derivative_range(const BetaProfile& profile) {
  {
    std::lock_guard<std::mutex> lock(profile.cache_->mutex);
    if (profile.cache_->range) return *profile.cache_->range;
  }
  Interval r = profile.bernoulli() ? Interval{INFINITY, -INFINITY} : sampled_range(profile);
  if (profile.bernoulli()) {
    for (std::size_t i = 0; i < profile.phi_constants().size(); ++i) {
      const double q = profile.phi_constants()[i] / profile.psi_constants()[i];
      r.lo = std::min(r.lo, q);
      r.hi = std::max(r.hi, q);
    }
  }
  std::lock_guard<std::mutex> lock(profile.cache_->mutex);
  profile.cache_->range = r;
  return r;
}

std::optional<double> legendre(const BetaProfile& profile, double s) {
  const Interval range = derivative_range(profile);
  const double slack = 1e-12 * std::max(1.0, std::abs(s));
  if (s < range.lo - slack || s > range.hi + slack) return std::nullopt;

  auto g = [&](double t) { return profile(t) + s * t; };
  std::vector<double> ts;
  for (int k = 0; k <= 32; ++k) ts.push_back(-8.0 + 0.5 * k);
  auto argmin = [&] {
    std::size_t best = 0;
    double bv = INFINITY;
    for (std::size_t k = 0; k < ts.size(); ++k)
      if (const double v = g(ts[k]); v < bv) {
        bv = v;
        best = k;
      }
    return best;
  };
  std::size_t k = argmin();
  if (k == 0 || k + 1 == ts.size()) {
    const double lo = std::max(-64.0, profile.settings().domain_lo), hi = std::min(64.0, profile.settings().domain_hi);
    ts.clear();
    for (int j = 0; j <= 64; ++j) ts.push_back(lo + (hi - lo) * j / 64.0);
    k = argmin();
  }
  const double a = ts[k == 0 ? 0 : k - 1], b = ts[std::min(k + 1, ts.size() - 1)];
  const double t = golden_min(g, a, b, 1e-8);
  return std::min(g(t), g(ts[k]));
}

std::vector<double> spectrum_grid(const BetaProfile& profile, int steps) {
  if (steps < 2) throw ConfigError("spectrum needs at least two steps");
  const Interval r = derivative_range(profile);
  std::vector<double> grid;
  for (int k = 0; k < steps; ++k) grid.push_back(k == steps - 1 ? r.hi : r.lo + r.width() * k / (steps - 1));
  const double lebesgue = profile.bernoulli() ? -beta_prime_gibbs(profile, 1.0) : -beta_prime(profile, 1.0).value;
  for (double extra : {1.0, lebesgue})
    if (extra > r.lo && extra < r.hi) grid.push_back(extra);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<SpectrumPoint> lyapunov_spectrum(const BetaProfile& profile, const std::vector<double>& grid,
                                             int threads) {
  std::vector<SpectrumPoint> out(grid.size());
  derivative_range(profile); // fill the cache before fanning out
  detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
    const double s = grid[i];
    out[i].s = s;
    if (!(s > 0.0)) return;
    if (auto v = legendre(profile, s)) out[i].dim = std::max(0.0, *v / s); // rounding at the range ends
  });
  return out;
}

HoelderEstimate hoelder_exponent(const BetaProfile& profile) {
  HoelderEstimate h;
  h.rho_numeric = sampled_range(profile).hi;
  if (profile.bernoulli()) h.rho_exact = derivative_range(profile).hi;
  h.rho = h.rho_exact.value_or(h.rho_numeric);
  h.exponent = 1.0 / h.rho;
  return h;
}

std::string to_string(Verdict v) { return v == Verdict::Dependent ? "dependent" : "independent"; }

DependenceResult dependence_test(const BetaProfile& profile, double tol) {
  DependenceResult r;
  r.tol = tol > 0.0 ? tol : (profile.pair()->piecewise_linear() ? 1e-6 : 1e-4);
  for (int k = 0; k <= 30; ++k) {
    const double s = -1.0 + 0.1 * k;
    r.max_deviation = std::max(r.max_deviation, std::abs(profile(s) - (1.0 - s)));
  }
  r.verdict = r.max_deviation < r.tol ? Verdict::Dependent : Verdict::Independent;
  return r;
}

} // namespace conjdim::thermo
