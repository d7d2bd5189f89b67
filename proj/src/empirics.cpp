#include "conjdim/empirics.hpp"

#include "conjdim/coding.hpp"
#include "conjdim/errors.hpp"
#include "internal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conjdim::empirics {

namespace {

constexpr int kTailDigits = 200;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double median_of(std::vector<double> v) {
  if (v.empty()) return NAN;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
}

double log_add(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void require_pl(const thermo::PotentialPair& pair, const char* what) {
  if (!pair.piecewise_linear())
    throw ConfigError(std::string(what) + " samples Bernoulli equilibrium states and needs piecewise-linear maps");
}

// Midpoint of the cylinder of `digits[from..]`, a proxy for the tail point.
double tail_point(const maps::BranchMap& m, const std::vector<int>& digits, std::size_t from) {
  const auto [lo, hi] = coding::cylinder_bounds(m, std::span<const int>(digits).subspan(from));
  return 0.5 * (lo + hi);
}

double chi_sum(const thermo::PotentialPair& pair, const std::vector<int>& digits, int n) {
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const int a = digits[static_cast<std::size_t>(k)];
    sum += pair.t().log_width(a) - pair.s().log_width(a);
  }
  return sum;
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GibbsSamplerPL GibbsSamplerPL::at(const thermo::BetaProfile& profile, double s, std::uint64_t seed) {
  require_pl(*profile.pair(), "Gibbs sampling");
  GibbsSamplerPL g;
  g.s = s;
  g.seed = seed;
  g.weights = thermo::gibbs_weights(profile, s);
  g.phi = profile.phi_constants();
  g.psi = profile.psi_constants();
  for (std::size_t i = 0; i < g.phi.size(); ++i) g.chi.push_back(g.psi[i] - g.phi[i]);
  return g;
}

GibbsSamplerPL GibbsSamplerPL::lebesgue(const thermo::PotentialPair& pair, std::uint64_t seed) {
  require_pl(pair, "Lebesgue digit sampling");
  GibbsSamplerPL g;
  g.s = 1.0;
  g.seed = seed;
  g.phi = pair.phi_constants();
  g.psi = pair.psi_constants();
  for (std::size_t i = 0; i < g.phi.size(); ++i) {
    g.weights.push_back(std::exp(g.phi[i]));
    g.chi.push_back(g.psi[i] - g.phi[i]);
  }
  return g;
}

double GibbsSamplerPL::mean_chi() const { return std::inner_product(weights.begin(), weights.end(), chi.begin(), 0.0); }

DigitStream::DigitStream(const std::vector<double>& weights, std::uint64_t seed) : rng_(seed) {
  double acc = 0.0;
  for (double w : weights) cumulative_.push_back(acc += w);
  for (double& c : cumulative_) c /= acc;
  cumulative_.back() = 1.0;
}

int DigitStream::next() {
  const double u = uniform01(rng_);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative_.begin(), std::ssize(cumulative_) - 1)) + 1;
}

std::vector<std::vector<int>> sample_gibbs(const GibbsSamplerPL& sampler, int n_digits, int count) {
  if (n_digits < 0 || count < 0) throw ConfigError("sample_gibbs: negative size");
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    DigitStream ds(sampler.weights, mix_seed(sampler.seed, static_cast<std::uint64_t>(i)));
    auto& v = out[static_cast<std::size_t>(i)];
    v.reserve(static_cast<std::size_t>(n_digits));
    for (int k = 0; k < n_digits; ++k) v.push_back(ds.next());
  }
  return out;
}

void TrajectoryStats::push(double chi, double c, long horizon) {
  ++steps;
  sum += chi;
  max = std::max(max, sum);
  min = std::min(min, sum);
  if (sum > c) {
    if (first_above < 0) first_above = steps;
    if (2 * steps > horizon) late_above = true;
  }
  if (sum < -c && first_below < 0) first_below = steps;
}

// ---------------------------------------------------------------------------

OscillationResult oscillation_check(const thermo::BetaProfile& profile, double s, long length, int count, double c,
                                    const ProbeSettings& settings) {
  if (length < 1 || count < 1) throw ConfigError("oscillation_check: length and count must be positive");
  const GibbsSamplerPL g = GibbsSamplerPL::at(profile, s, settings.seed);
  OscillationResult r;
  r.s = s;
  r.c = c;
  r.length = length;
  r.mean_chi = g.mean_chi();
  r.samples.resize(static_cast<std::size_t>(count));
  detail::parallel_for(r.samples.size(), settings.threads, [&](std::size_t i) {
    DigitStream ds(g.weights, mix_seed(g.seed, i));
    TrajectoryStats st;
    for (long n = 0; n < length; ++n) st.push(g.chi[static_cast<std::size_t>(ds.next() - 1)], c, length);
    r.samples[i] = st;
  });
  long both = 0, up = 0, down = 0, late = 0;
  for (const auto& st : r.samples) {
    both += st.first_above >= 0 && st.first_below >= 0;
    up += st.first_above >= 0;
    down += st.first_below >= 0;
    late += st.late_above;
  }
  r.fraction = static_cast<double>(both) / count;
  r.upper_fraction = static_cast<double>(up) / count;
  r.lower_fraction = static_cast<double>(down) / count;
  r.late_upper_fraction = static_cast<double>(late) / count;
  return r;
}

std::pair<double, double> log_one_sided_quotients(const thermo::PotentialPair& pair, const std::vector<int>& digits,
                                                   int n) {
  require_pl(pair, "log-space quotients");
  if (n < 0 || static_cast<std::size_t>(n) >= digits.size()) throw ConfigError("quotient level exceeds the digits");
  const double base = chi_sum(pair, digits, n);
  const double y = tail_point(pair.s(), digits, static_cast<std::size_t>(n));
  const double ty = tail_point(pair.t(), digits, static_cast<std::size_t>(n));
  return {base + std::log(ty / y), base + std::log((1.0 - ty) / (1.0 - y))};
}

double log_endpoint_quotient(const thermo::PotentialPair& pair, const std::vector<int>& digits, int n) {
  const auto [against_lo, against_hi] = log_one_sided_quotients(pair, digits, n);
  const double y = tail_point(pair.s(), digits, static_cast<std::size_t>(n));
  return y >= 0.5 ? against_lo : against_hi;
}

LebesgueResult lebesgue_zero_check(const thermo::PotentialPair& pair, int count, int n_scale,
                                   const ProbeSettings& settings) {
  if (count < 1 || n_scale < 5) throw ConfigError("lebesgue_zero_check: need count >= 1 and n_scale >= 5");
  std::vector<int> levels;
  for (int n = 5; n <= n_scale; n += 5) levels.push_back(n);

  LebesgueResult r;
  r.log_quotients.assign(static_cast<std::size_t>(count), std::vector<double>(levels.size()));
  if (pair.piecewise_linear()) {
    const GibbsSamplerPL g = GibbsSamplerPL::lebesgue(pair, settings.seed);
    r.expected_rate = std::exp(g.mean_chi());
    detail::parallel_for(static_cast<std::size_t>(count), settings.threads, [&](std::size_t i) {
      DigitStream ds(g.weights, mix_seed(g.seed, i));
      std::vector<int> digits(static_cast<std::size_t>(n_scale + kTailDigits));
      for (int& a : digits) a = ds.next();
      for (std::size_t k = 0; k < levels.size(); ++k) r.log_quotients[i][k] = log_endpoint_quotient(pair, digits, levels[k]);
    });
  } else {
    // Floating-point route through Theta itself.
    detail::parallel_for(static_cast<std::size_t>(count), settings.threads, [&](std::size_t i) {
      std::mt19937_64 rng(mix_seed(settings.seed, i));
      const double xi = uniform01(rng);
      const coding::Word w = coding::encode(pair.s(), xi, n_scale);
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto prefix = w.symbols().first(static_cast<std::size_t>(levels[k]));
        const auto [lo, hi] = coding::cylinder_bounds(pair.s(), prefix);
        const double eta = xi - lo >= hi - xi ? lo : hi;
        const double tol = 1e-4 * std::exp(coding::log_cylinder_length(pair.t(), prefix));
        const coding::Quotient q = coding::diff_quotient(pair.s(), pair.t(), xi, eta, std::max(tol, 1e-15));
        r.log_quotients[i][k] = std::log(q.value);
      }
    });
  }

  std::vector<double> x, ylog;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    std::vector<double> col;
    for (const auto& row : r.log_quotients) col.push_back(row[k]);
    LevelSummary ls;
    ls.level = levels[k];
    const double med = median_of(col);
    ls.median = std::exp(med);
    ls.below_1e_2 = static_cast<double>(std::count_if(col.begin(), col.end(), [](double v) { return v < std::log(1e-2); })) / count;
    ls.below_1e_4 = static_cast<double>(std::count_if(col.begin(), col.end(), [](double v) { return v < std::log(1e-4); })) / count;
    r.levels.push_back(ls);
    x.push_back(levels[k]);
    ylog.push_back(med);
  }
  // Least-squares slope of log median against n.
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(ylog.begin(), ylog.end(), 0.0) / ylog.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (ylog[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  r.fitted_rate = sxx > 0.0 ? std::exp(sxy / sxx) : NAN;
  r.median_final = r.levels.back().median;
  return r;
}

BlowupResult blowup_probe(const thermo::BetaProfile& profile, double s, int count, long length, double threshold,
                          const ProbeSettings& settings) {
  if (count < 1 || length < 1) throw ConfigError("blowup_probe: count and length must be positive");
  if (!(threshold > 1.0)) throw ConfigError("blowup_probe: threshold must exceed 1");
  const GibbsSamplerPL g = GibbsSamplerPL::at(profile, s, settings.seed);
  BlowupResult r;
  r.s = s;
  r.length = length;
  r.threshold = threshold;
  r.mean_chi = g.mean_chi();
  r.log_quotients.resize(static_cast<std::size_t>(count));
  detail::parallel_for(static_cast<std::size_t>(count), settings.threads, [&](std::size_t i) {
    DigitStream ds(g.weights, mix_seed(g.seed, i));
    std::vector<int> digits(static_cast<std::size_t>(length + kTailDigits));
    for (int& a : digits) a = ds.next();
    r.log_quotients[i] = log_endpoint_quotient(*profile.pair(), digits, static_cast<int>(length));
  });
  const double lt = std::log(threshold);
  r.fraction = static_cast<double>(std::count_if(r.log_quotients.begin(), r.log_quotients.end(),
                                                 [&](double v) { return v > lt; })) / count;
  r.decaying = static_cast<double>(std::count_if(r.log_quotients.begin(), r.log_quotients.end(),
                                                 [&](double v) { return v < -lt; })) / count;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct PairLogs {
  double dx; // log |x - y|
  double dt; // log |Theta(x) - Theta(y)|
};

// Endpoints of the cylinder of `w`.
PairLogs cylinder_pair(const thermo::PotentialPair& pair, const std::vector<int>& w) {
  return {coding::log_cylinder_length(pair.s(), w), coding::log_cylinder_length(pair.t(), w)};
}

// lo of [u a d^k] and hi of [u (a+1) 1^k]: two neighbouring blocks meeting at
// the boundary between [u a] and [u (a+1)].
PairLogs straddling_pair(const thermo::PotentialPair& pair, const std::vector<int>& u, int a, int k) {
  const int d = pair.branches();
  std::vector<int> left = u, right = u;
  left.push_back(a);
  right.push_back(a + 1);
  left.insert(left.end(), static_cast<std::size_t>(k), d);
  right.insert(right.end(), static_cast<std::size_t>(k), 1);
  const PairLogs l = cylinder_pair(pair, left), r = cylinder_pair(pair, right);
  return {log_add(l.dx, r.dx), log_add(l.dt, r.dt)};
}

} // namespace

HolderProbeResult s_holder_probe(const thermo::PotentialPair& pair, double s, long pairs_count, int max_depth,
                                 const ProbeSettings& settings) {
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("s_holder_probe: s must lie in (0,1]");
  if (max_depth < 2 || pairs_count < 1) throw ConfigError("s_holder_probe: need max_depth >= 2 and pairs_count >= 1");
  const int d = pair.branches();
  HolderProbeResult r;
  r.s = s;
  r.fit_depth = std::min(10, max_depth);
  r.pairs = pairs_count;
  auto ratio = [&](const PairLogs& p) { return p.dt - s * p.dx; };

  // Exhaustive fit over all words up to the coarse depth.
  r.fitted_log_bound = 0.0; // the empty word, x = 0 and y = 1
  std::vector<int> w;
  for (int n = 1; n <= r.fit_depth; ++n) {
    w.assign(static_cast<std::size_t>(n), 1);
    while (true) {
      r.fitted_log_bound = std::max(r.fitted_log_bound, ratio(cylinder_pair(pair, w)));
      std::size_t k = 0;
      while (k < w.size() && w[k] == d) w[k++] = 1;
      if (k == w.size()) break;
      ++w[k];
    }
  }

  // Random prefix followed by a block of 1s or ds; depth cycles through 1..max_depth.
  std::vector<double> best(static_cast<std::size_t>(max_depth) + 1, -INFINITY);
  std::vector<long> violations(static_cast<std::size_t>(pairs_count), 0);
  std::vector<std::pair<int, double>> found(static_cast<std::size_t>(pairs_count));
  detail::parallel_for(static_cast<std::size_t>(pairs_count), settings.threads, [&](std::size_t i) {
    std::mt19937_64 rng(mix_seed(settings.seed, i));
    const int n = 1 + static_cast<int>(i % static_cast<std::size_t>(max_depth));
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
    std::vector<int> u(static_cast<std::size_t>(n - k));
    for (int& a : u) a = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(d));
    double v;
    if (rng() % 2 == 0) {
      std::vector<int> word = u;
      word.insert(word.end(), static_cast<std::size_t>(k), rng() % 2 ? 1 : d);
      v = ratio(cylinder_pair(pair, word));
    } else {
      const int a = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(d - 1));
      const int block = std::min(k, n - 1);
      u.resize(static_cast<std::size_t>(n - 1 - block));
      v = ratio(straddling_pair(pair, u, a, block));
    }
    found[i] = {n, v};
    violations[i] = v > r.fitted_log_bound + 1e-9;
  });
  for (const auto& [n, v] : found) best[static_cast<std::size_t>(n)] = std::max(best[static_cast<std::size_t>(n)], v);
  r.violations = std::accumulate(violations.begin(), violations.end(), 0L);
  for (int n = 1; n <= max_depth; ++n) r.max_log_ratio[n] = best[static_cast<std::size_t>(n)];
  r.growth = std::exp(best[static_cast<std::size_t>(max_depth)] - best[static_cast<std::size_t>(max_depth / 2)]);
  return r;
}

// ---------------------------------------------------------------------------

MollifyTable mollify_convergence(double tau, const std::vector<int>& windows, int depth, int threads) {
  MollifyTable t;
  t.tau = tau;
  t.closed_form = thermo::salem_closed_forms(tau).dim;
  if (!std::is_sorted(windows.begin(), windows.end())) throw ConfigError("mollify: window counts must ascend");
  t.rows.resize(windows.size());
  const auto doubling = maps::make_map("doubling:d=2");
  detail::parallel_for(windows.size(), threads, [&](std::size_t i) {
    MollifyRow& row = t.rows[i];
    row.windows = windows[i];
    try {
      maps::MapSpec spec;
      spec.family = maps::Family::MollifiedSalem;
      spec.tau = tau;
      spec.windows = windows[i];
      auto pair = std::make_shared<const thermo::PotentialPair>(maps::make_map(spec), doubling);
      thermo::SolverSettings ss;
      ss.depth = depth;
      const auto profile = thermo::BetaProfile::numeric(pair, ss);
      row.s0 = thermo::find_s0(profile);
      row.dim = profile.tilde(row.s0);
      row.bracket_width = thermo::pressure_cylinder(*pair, row.s0, profile(row.s0), depth).width();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return t;
}

SweepTable smooth_dependence_sweep(const std::vector<double>& taus, int depth, int threads) {
  SweepTable t;
  t.rows.resize(taus.size());
  const auto doubling = maps::make_map("doubling:d=2");
  detail::parallel_for(taus.size(), threads, [&](std::size_t i) {
    SweepRow& row = t.rows[i];
    row.tau = taus[i];
    row.second_difference = NAN;
    try {
      maps::MapSpec spec;
      spec.family = maps::Family::Sine;
      spec.tau = taus[i];
      auto pair = std::make_shared<const thermo::PotentialPair>(maps::make_map(spec), doubling);
      thermo::SolverSettings ss;
      ss.depth = depth;
      const auto profile = thermo::BetaProfile::numeric(pair, ss);
      row.s0 = thermo::find_s0(profile);
      row.dim = profile.tilde(row.s0);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  for (std::size_t i = 1; i + 1 < t.rows.size(); ++i) {
    const auto &a = t.rows[i - 1], &b = t.rows[i], &c = t.rows[i + 1];
    if (!a.error.empty() || !b.error.empty() || !c.error.empty()) continue;
    const double h1 = b.tau - a.tau, h2 = c.tau - b.tau;
    t.rows[i].second_difference = 2.0 * ((c.dim - b.dim) / h2 - (b.dim - a.dim) / h1) / (h1 + h2);
    t.max_second_difference = std::max(t.max_second_difference, std::abs(t.rows[i].second_difference));
  }
  return t;
}

std::vector<SalemRow> salem_sweep(const std::vector<double>& taus, int depth, int threads) {
  std::vector<SalemRow> rows(taus.size());
  const auto doubling = maps::make_map("doubling:d=2");
  detail::parallel_for(taus.size(), threads, [&](std::size_t i) {
    maps::MapSpec spec;
    spec.family = maps::Family::Salem;
    spec.tau = taus[i];
    auto pair = std::make_shared<const thermo::PotentialPair>(maps::make_map(spec), doubling);
    thermo::SolverSettings ss;
    ss.depth = depth;
    const auto profile = thermo::BetaProfile::numeric(pair, ss);
    const auto cf = thermo::salem_closed_forms(taus[i]);
    SalemRow& row = rows[i];
    row.tau = taus[i];
    row.dim_numeric = thermo::dim_nondiff(profile);
    row.dim_closed = cf.dim;
    row.dim_variational = thermo::variational_dim(*pair).dim;
    row.p = cf.p;
    row.s0 = cf.s0;
  });
  return rows;
}

} // namespace conjdim::empirics
