#include "conjdim/maps.hpp"

#include "conjdim/errors.hpp"
#include "internal/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace conjdim::maps {

namespace {

constexpr double kNewtonTol = 1e-14;
constexpr int kNewtonMaxIter = 100;

std::string family_name(Family f) {
  switch (f) {
  case Family::Salem: return "salem";
  case Family::Doubling: return "doubling";
  case Family::Sine: return "sine";
  case Family::MollifiedSalem: return "mollified-salem";
  case Family::CustomPL: return "custom-pl";
  }
  return "?";
}

double require_double(std::string_view key, std::string_view value) {
  double x = 0.0;
  if (!detail::parse_double(value, x) || !std::isfinite(x))
    throw ConfigError("map parameter '" + std::string(key) + "' is not a number: '" + std::string(value) + "'");
  return x;
}

int require_int(std::string_view key, std::string_view value) {
  long long x = 0;
  if (!detail::parse_int(value, x) || x < -1000000000LL || x > 1000000000LL)
    throw ConfigError("map parameter '" + std::string(key) + "' is not an integer: '" + std::string(value) + "'");
  return static_cast<int>(x);
}

// Solves F(x) = target for increasing F on [lo, hi]. Newton steps that leave
// the bracket fall back to bisection.
double solve_increasing(const SmoothLift& f, double target, double lo, double hi) {
  double flo = f.value(lo) - target;
  double fhi = f.value(hi) - target;
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  double x = lo + (hi - lo) * (-flo) / (fhi - flo);
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const double fx = f.value(x) - target;
    if (std::abs(fx) <= kNewtonTol) return x;
    if (fx < 0.0) lo = x; else hi = x;
    if (!(hi > lo) || std::nextafter(lo, hi) >= hi) return x;
    const double slope = f.slope(x);
    double next = x - fx / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  throw ConvergenceError("inverse branch: Newton/bisection did not converge for target " + detail::shortest(target));
}

} // namespace

// ---------------------------------------------------------------------------
// MapSpec

MapSpec MapSpec::parse(std::string_view text) {
  text = detail::trim(text);
  MapSpec spec;
  const auto colon = text.find(':');
  const std::string_view fam = detail::trim(text.substr(0, colon));
  if (fam == "salem") spec.family = Family::Salem;
  else if (fam == "doubling") spec.family = Family::Doubling;
  else if (fam == "sine") spec.family = Family::Sine;
  else if (fam == "mollified-salem") spec.family = Family::MollifiedSalem;
  else if (fam == "custom-pl") spec.family = Family::CustomPL;
  else throw ConfigError("unknown map family '" + std::string(fam) + "'");

  bool have_tau = false, have_n = false, have_breaks = false;
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = detail::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("map parameter without value: '" + std::string(item) + "'");
    const std::string_view key = detail::trim(item.substr(0, eq));
    const std::string_view value = detail::trim(item.substr(eq + 1));
    if (key == "tau" && spec.family != Family::Doubling && spec.family != Family::CustomPL) {
      spec.tau = require_double(key, value);
      have_tau = true;
    } else if (key == "d" && spec.family == Family::Doubling) {
      spec.d = require_int(key, value);
    } else if (key == "n" && spec.family == Family::MollifiedSalem) {
      spec.windows = require_int(key, value);
      have_n = true;
    } else if (key == "breaks" && spec.family == Family::CustomPL) {
      spec.breaks.clear();
      std::string_view list = value;
      while (!list.empty()) {
        const auto slash = list.find('/');
        spec.breaks.push_back(require_double(key, detail::trim(list.substr(0, slash))));
        list = slash == std::string_view::npos ? std::string_view{} : list.substr(slash + 1);
      }
      have_breaks = true;
    } else {
      throw ConfigError("unknown parameter '" + std::string(key) + "' for map family " + family_name(spec.family));
    }
  }

  switch (spec.family) {
  case Family::Salem:
    if (!have_tau) throw ConfigError("salem requires tau");
    if (!(spec.tau > 0.0 && spec.tau < 1.0) || spec.tau == 0.5)
      throw ConfigError("salem tau must lie in (0,1) and differ from 1/2");
    break;
  case Family::Doubling:
    if (spec.d < 2) throw ConfigError("doubling requires d >= 2");
    break;
  case Family::Sine:
    if (!have_tau) throw ConfigError("sine requires tau");
    if (!(spec.tau > 0.0 && spec.tau < 1.0)) throw ConfigError("sine tau must lie in (0,1)");
    break;
  case Family::MollifiedSalem:
    if (!have_tau || !have_n) throw ConfigError("mollified-salem requires tau and n");
    if (!(spec.tau > 0.0 && spec.tau < 1.0) || spec.tau == 0.5)
      throw ConfigError("mollified-salem tau must lie in (0,1) and differ from 1/2");
    if (spec.windows < 1) throw ConfigError("mollified-salem requires n >= 1 (window width 1/(4n))");
    break;
  case Family::CustomPL:
    if (!have_breaks || spec.breaks.empty()) throw ConfigError("custom-pl requires breaks=b1/b2/...");
    for (std::size_t i = 0; i < spec.breaks.size(); ++i) {
      const double b = spec.breaks[i];
      if (!(b > 0.0 && b < 1.0) || (i > 0 && !(b > spec.breaks[i - 1])))
        throw ConfigError("custom-pl breaks must be strictly increasing inside (0,1)");
    }
    spec.d = static_cast<int>(spec.breaks.size()) + 1;
    break;
  }
  return spec;
}

std::string MapSpec::to_string() const {
  std::string out = family_name(family);
  switch (family) {
  case Family::Salem:
  case Family::Sine: out += ":tau=" + detail::shortest(tau); break;
  case Family::Doubling: out += ":d=" + std::to_string(d); break;
  case Family::MollifiedSalem:
    out += ":tau=" + detail::shortest(tau) + ",n=" + std::to_string(windows);
    break;
  case Family::CustomPL:
    out += ":breaks=";
    for (std::size_t i = 0; i < breaks.size(); ++i) out += (i ? "/" : "") + detail::shortest(breaks[i]);
    break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lifts

SmoothLift sine_lift(double tau) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  SmoothLift f;
  f.value = [tau](double x) { return 2.0 * x + tau / two_pi * std::sin(two_pi * x); };
  f.slope = [tau](double x) { return 2.0 + tau * std::cos(two_pi * x); };
  f.curvature = [tau](double x) { return -two_pi * tau * std::sin(two_pi * x); };
  return f;
}

namespace {

struct MollifiedProfile {
  double tau;
  double h; // half window width
  double left_slope;  // 1/tau
  double right_slope; // 1/(1-tau)
  double scale = 1.0;
  double knots[6];
  double cumulative[6];

  MollifiedProfile(double t, int n) : tau(t), h(1.0 / (8.0 * n)), left_slope(1.0 / t), right_slope(1.0 / (1.0 - t)) {
    knots[0] = 0.0;
    knots[1] = h;
    knots[2] = tau - h;
    knots[3] = tau + h;
    knots[4] = 1.0 - h;
    knots[5] = 1.0;
    cumulative[0] = 0.0;
    for (int i = 1; i < 6; ++i) cumulative[i] = cumulative[i - 1] + raw_integral(i - 1, knots[i]);
    scale = 2.0 / cumulative[5];
    for (double& c : cumulative) c *= scale;
  }

  // Blend from a to b across a window of width 2h, parameter t in [0, 2h].
  double blend(double a, double b, double t) const {
    return a + 0.5 * (b - a) * (1.0 - std::cos(std::numbers::pi * t / (2.0 * h)));
  }
  double blend_rate(double a, double b, double t) const {
    return 0.5 * (b - a) * std::numbers::pi / (2.0 * h) * std::sin(std::numbers::pi * t / (2.0 * h));
  }
  double blend_antiderivative(double a, double b, double t) const {
    return a * t + 0.5 * (b - a) * (t - 2.0 * h / std::numbers::pi * std::sin(std::numbers::pi * t / (2.0 * h)));
  }

  // Segment i: window parameters (a, b, offset) or a constant.
  struct Piece { bool window; double a, b, origin; };
  Piece piece(int i) const {
    switch (i) {
    case 0: return {true, right_slope, left_slope, -h};
    case 1: return {false, left_slope, left_slope, 0.0};
    case 2: return {true, left_slope, right_slope, tau - h};
    case 3: return {false, right_slope, right_slope, 0.0};
    default: return {true, right_slope, left_slope, 1.0 - h};
    }
  }

  double raw_integral(int i, double x) const {
    const Piece p = piece(i);
    if (!p.window) return p.a * (x - knots[i]);
    return blend_antiderivative(p.a, p.b, x - p.origin) - blend_antiderivative(p.a, p.b, knots[i] - p.origin);
  }

  int segment(double x) const {
    for (int i = 0; i < 4; ++i)
      if (x < knots[i + 1]) return i;
    return 4;
  }

  double value(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    const int i = segment(x);
    return cumulative[i] + scale * raw_integral(i, x);
  }
  double slope(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    const Piece p = piece(segment(x));
    return scale * (p.window ? blend(p.a, p.b, x - p.origin) : p.a);
  }
  double curvature(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    const Piece p = piece(segment(x));
    return p.window ? scale * blend_rate(p.a, p.b, x - p.origin) : 0.0;
  }
};

} // namespace

SmoothLift mollified_salem_lift(double tau, int windows) {
  if (windows < 1) throw ValidationError("mollified-salem: window count must be >= 1");
  auto prof = std::make_shared<const MollifiedProfile>(tau, windows);
  if (!(2.0 * prof->h < std::min(tau, 1.0 - tau)))
    throw ValidationError("mollified-salem: windows of width 1/(4n) overlap for tau=" + detail::shortest(tau) +
                          ", n=" + std::to_string(windows));
  SmoothLift f;
  f.value = [prof](double x) { return prof->value(x); };
  f.slope = [prof](double x) { return prof->slope(x); };
  f.curvature = [prof](double x) { return prof->curvature(x); };
  return f;
}

// ---------------------------------------------------------------------------
// BranchMap

BranchMap BranchMap::piecewise_linear(std::vector<double> breakpoints, std::string label) {
  if (breakpoints.size() < 3) throw ValidationError("piecewise-linear map needs at least two cells");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw ValidationError("cells must start at 0 and end at 1");
  BranchMap m;
  m.kind_ = MapKind::PiecewiseLinear;
  m.label_ = std::move(label);
  m.breakpoints_ = std::move(breakpoints);
  double widest = 0.0, narrowest = 1.0;
  for (std::size_t j = 0; j + 1 < m.breakpoints_.size(); ++j) {
    const double w = m.breakpoints_[j + 1] - m.breakpoints_[j];
    if (!(w > 0.0)) throw ValidationError("cells must have positive width");
    m.widths_.push_back(w);
    m.log_widths_.push_back(std::log(w));
    widest = std::max(widest, w);
    narrowest = std::min(narrowest, w);
  }
  if (!(widest < 1.0)) throw ValidationError("map is not expanding");
  m.min_expansion_ = 1.0 / widest;
  m.max_expansion_ = 1.0 / narrowest;
  return m;
}

BranchMap BranchMap::smooth(int d, SmoothLift lift, std::string label, int grid_points) {
  if (d < 2) throw ValidationError("smooth map needs d >= 2");
  if (!lift.value || !lift.slope || !lift.curvature) throw ValidationError("smooth map needs value, slope and curvature");
  if (std::abs(lift.value(0.0)) > 1e-12 || std::abs(lift.value(1.0) - d) > 1e-9)
    throw ValidationError("lift must satisfy F(0) = 0 and F(1) = d");

  BranchMap m;
  m.kind_ = MapKind::Smooth;
  m.label_ = std::move(label);
  m.lift_ = std::move(lift);

  const int points = std::max(grid_points, 256 * d);
  m.rate_grid_.resize(static_cast<std::size_t>(points));
  double lo_slope = INFINITY, hi_slope = 0.0;
  for (int k = 0; k < points; ++k) {
    const double x = static_cast<double>(k) / (points - 1);
    const double sl = m.lift_.slope(x);
    lo_slope = std::min(lo_slope, sl);
    hi_slope = std::max(hi_slope, sl);
    m.rate_grid_[static_cast<std::size_t>(k)] = std::abs(m.lift_.curvature(x) / sl);
  }
  m.rate_accum_.assign(static_cast<std::size_t>(points), 0.0);
  for (std::size_t k = 1; k < m.rate_grid_.size(); ++k)
    m.rate_accum_[k] = m.rate_accum_[k - 1] + std::max(m.rate_grid_[k - 1], m.rate_grid_[k]) / (points - 1);
  if (!(lo_slope > 1.0))
    throw ValidationError("map '" + m.label_ + "' is not expanding: min derivative " + detail::shortest(lo_slope));
  m.min_expansion_ = lo_slope;
  m.max_expansion_ = hi_slope;

  m.breakpoints_.assign(static_cast<std::size_t>(d) + 1, 0.0);
  m.breakpoints_.back() = 1.0;
  for (int j = 1; j < d; ++j)
    m.breakpoints_[static_cast<std::size_t>(j)] = solve_increasing(m.lift_, static_cast<double>(j), 0.0, 1.0);
  for (int j = 0; j < d; ++j)
    if (!(m.breakpoints_[static_cast<std::size_t>(j) + 1] > m.breakpoints_[static_cast<std::size_t>(j)]))
      throw ValidationError("lift is not strictly increasing");
  return m;
}

int BranchMap::cell_of(double xi) const {
  xi = std::clamp(xi, 0.0, 1.0);
  const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), xi);
  return static_cast<int>(it - breakpoints_.begin());
}

double BranchMap::forward(double xi) const {
  xi = std::clamp(xi, 0.0, 1.0);
  const int a = cell_of(xi);
  const auto j = static_cast<std::size_t>(a - 1);
  if (xi == breakpoints_[j + 1]) return 1.0;
  double y;
  if (kind_ == MapKind::PiecewiseLinear) y = (xi - breakpoints_[j]) / widths_[j];
  else y = lift_.value(xi) - static_cast<double>(a - 1);
  return std::clamp(y, 0.0, 1.0);
}

double BranchMap::derivative(double xi) const {
  if (kind_ == MapKind::PiecewiseLinear) return 1.0 / widths_[static_cast<std::size_t>(cell_of(xi) - 1)];
  return lift_.slope(std::clamp(xi, 0.0, 1.0));
}

double BranchMap::lift(double xi) const {
  if (kind_ == MapKind::Smooth) return lift_.value(xi);
  const int a = cell_of(xi);
  const auto j = static_cast<std::size_t>(a - 1);
  return static_cast<double>(a - 1) + (xi - breakpoints_[j]) / widths_[j];
}

double BranchMap::lift_slope(double xi) const { return lift_.slope(xi); }

double BranchMap::log_slope_rate(double xi) const { return std::abs(lift_.curvature(xi) / lift_.slope(xi)); }

double BranchMap::inverse_branch(int a, double eta) const {
  if (a < 1 || a > branches()) throw ConfigError("symbol out of range: " + std::to_string(a));
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("inverse_branch: point outside [0,1]");
  const auto j = static_cast<std::size_t>(a - 1);
  if (eta == 0.0) return breakpoints_[j];
  if (eta == 1.0) return breakpoints_[j + 1];
  if (kind_ == MapKind::PiecewiseLinear) return breakpoints_[j] + eta * widths_[j];
  return solve_increasing(lift_, static_cast<double>(a - 1) + eta, breakpoints_[j], breakpoints_[j + 1]);
}

double BranchMap::log_inv_deriv(int a, double eta) const {
  if (kind_ == MapKind::PiecewiseLinear) {
    if (a < 1 || a > branches()) throw ConfigError("symbol out of range: " + std::to_string(a));
    return log_widths_[static_cast<std::size_t>(a - 1)];
  }
  return -std::log(lift_slope(inverse_branch(a, eta)));
}

double BranchMap::log_width(int a) const {
  if (kind_ != MapKind::PiecewiseLinear) throw ConfigError("log_width is defined for piecewise-linear maps only");
  return log_widths_.at(static_cast<std::size_t>(a - 1));
}

double BranchMap::log_derivative_variation(double lo, double hi) const {
  if (kind_ == MapKind::PiecewiseLinear || !(hi > lo)) return 0.0;
  const auto n = static_cast<long>(rate_grid_.size());
  const double scale = static_cast<double>(n - 1);
  auto cell = [&](double x) { return std::clamp(static_cast<long>(std::floor(x * scale)), 0L, n - 2); };
  auto cell_max = [&](long k) {
    return std::max(rate_grid_[static_cast<std::size_t>(k)], rate_grid_[static_cast<std::size_t>(k + 1)]);
  };
  const long a = cell(lo), b = cell(hi);
  const double edge = std::max(log_slope_rate(lo), log_slope_rate(hi));
  if (a == b) return (hi - lo) * std::max(edge, cell_max(a));
  // Partial cells at both ends plus whole cells in between.
  const double left = ((a + 1) / scale - lo) * std::max(log_slope_rate(lo), cell_max(a));
  const double right = (hi - b / scale) * std::max(log_slope_rate(hi), cell_max(b));
  return left + (rate_accum_[static_cast<std::size_t>(b)] - rate_accum_[static_cast<std::size_t>(a + 1)]) + right;
}

// ---------------------------------------------------------------------------

BranchMap build(const MapSpec& spec) {
  const std::string label = spec.to_string();
  switch (spec.family) {
  case Family::Salem:
    return BranchMap::piecewise_linear({0.0, spec.tau, 1.0}, label);
  case Family::Doubling: {
    std::vector<double> bp(static_cast<std::size_t>(spec.d) + 1);
    for (int j = 0; j <= spec.d; ++j) bp[static_cast<std::size_t>(j)] = static_cast<double>(j) / spec.d;
    bp.back() = 1.0;
    return BranchMap::piecewise_linear(std::move(bp), label);
  }
  case Family::Sine:
    if (!(spec.tau > 0.0 && spec.tau < 1.0)) throw ConfigError("sine tau must lie in (0,1)");
    return BranchMap::smooth(2, sine_lift(spec.tau), label);
  case Family::MollifiedSalem: {
    if (spec.windows < 1) throw ValidationError("mollified-salem: window count must be >= 1");
    // Resolve each half window with at least eight grid intervals.
    const int grid = std::max(512, 64 * spec.windows + 1);
    return BranchMap::smooth(2, mollified_salem_lift(spec.tau, spec.windows), label, grid);
  }
  case Family::CustomPL: {
    std::vector<double> bp{0.0};
    bp.insert(bp.end(), spec.breaks.begin(), spec.breaks.end());
    bp.push_back(1.0);
    return BranchMap::piecewise_linear(std::move(bp), label);
  }
  }
  throw ConfigError("unhandled map family");
}

MapPtr make_map(const MapSpec& spec) { return std::make_shared<const BranchMap>(build(spec)); }

MapPtr make_map(std::string_view spec_text) { return make_map(MapSpec::parse(spec_text)); }

} // namespace conjdim::maps
