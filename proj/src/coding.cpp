#include "conjdim/coding.hpp"

#include "conjdim/errors.hpp"
#include "internal/numfmt.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

namespace conjdim::coding {

void Word::validate(int d) const {
  for (int a : symbols_)
    if (a < 1 || a > d) throw ConfigError("word symbol " + std::to_string(a) + " outside {1.." + std::to_string(d) + "}");
}

std::string Word::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < symbols_.size(); ++i) out += (i ? "," : "") + std::to_string(symbols_[i]);
  return out + ")";
}

Word encode(const maps::BranchMap& map, double xi, int depth) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("encode: point outside [0,1]");
  if (depth < 0) throw ConfigError("encode: negative depth");
  std::vector<int> digits;
  digits.reserve(static_cast<std::size_t>(depth));
  double x = xi;
  for (int k = 0; k < depth; ++k) {
    digits.push_back(map.cell_of(x));
    x = map.forward(x);
  }
  return Word(std::move(digits));
}

std::pair<double, double> cylinder_bounds(const maps::BranchMap& map, std::span<const int> symbols) {
  double lo = 0.0, hi = 1.0;
  for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) {
    lo = map.inverse_branch(*it, lo);
    hi = map.inverse_branch(*it, hi);
  }
  return {lo, hi};
}

CylinderInterval cylinder(const maps::BranchMap& map, const Word& w) {
  w.validate(map.branches());
  const auto [lo, hi] = cylinder_bounds(map, w.symbols());
  return CylinderInterval{w, lo, hi, map.label()};
}

double log_cylinder_length(const maps::BranchMap& map, std::span<const int> symbols) {
  if (map.piecewise_linear()) {
    double sum = 0.0;
    for (int a : symbols) sum += map.log_width(a);
    return sum;
  }
  const auto [lo, hi] = cylinder_bounds(map, symbols);
  if (!(hi - lo > 4.0 * (std::nextafter(hi, 2.0) - hi)))
    throw PrecisionError("cylinder of depth " + std::to_string(symbols.size()) + " on '" + map.label() +
                         "' is below double resolution");
  return std::log(hi - lo);
}

ThetaValue theta(const maps::BranchMap& s, const maps::BranchMap& t, double xi, double tol) {
  if (!(tol > 0.0)) throw ConfigError("theta: tol must be positive");
  if (s.branches() != t.branches()) throw ConfigError("theta: maps have different numbers of branches");
  if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("theta: point outside [0,1]");

  const double resolution = t.piecewise_linear() ? 0.0 : 1e-14;
  std::vector<int> digits;
  double x = xi;
  // Once the orbit lands on 0 or 1 the remaining coding is 1,1,... or d,d,...
  // and Theta is the matching endpoint of the T-cylinder of the prefix.
  auto exact_endpoint = [&](bool at_one) {
    const auto [lo, hi] = cylinder_bounds(t, digits);
    const double err = 2.0 * static_cast<double>(digits.size() + 1) * DBL_EPSILON + resolution;
    return ThetaValue{at_one ? hi : lo, err, static_cast<int>(digits.size())};
  };

  int n = static_cast<int>(std::floor(std::log(1.0 / (2.0 * tol)) / std::log(t.max_expansion())));
  n = std::clamp(n, 1, kThetaMaxDepth);
  for (; n <= kThetaMaxDepth; ++n) {
    while (static_cast<int>(digits.size()) < n) {
      if (x == 0.0) return exact_endpoint(false);
      if (x == 1.0) return exact_endpoint(true);
      digits.push_back(s.cell_of(x));
      x = s.forward(x);
    }
    const auto [lo, hi] = cylinder_bounds(t, digits);
    if (hi - lo < 2.0 * tol) return ThetaValue{0.5 * (lo + hi), 0.5 * (hi - lo) + resolution, n};
  }
  throw ConvergenceError("theta: depth cap " + std::to_string(kThetaMaxDepth) + " reached before tol " +
                         detail::shortest(tol));
}

Quotient diff_quotient(const maps::BranchMap& s, const maps::BranchMap& t, double xi, double eta, double tol) {
  if (xi == eta) throw ConfigError("diff_quotient: points coincide");
  const ThetaValue a = theta(s, t, xi, tol);
  const ThetaValue b = theta(s, t, eta, tol);
  const double dx = xi - eta;
  Quotient q{(a.value - b.value) / dx, (a.error_bound + b.error_bound) / std::abs(dx)};
  if (q.error_bound > 0.1 * std::abs(q.value))
    throw PrecisionError("diff_quotient: error bound " + detail::shortest(q.error_bound) + " exceeds 10% of quotient " +
                         detail::shortest(q.value) + "; decrease tol");
  return q;
}

std::vector<ThetaRow> theta_grid(const maps::BranchMap& s, const maps::BranchMap& t, int points, double tol) {
  if (points < 2) throw ConfigError("theta grid needs at least two points");
  std::vector<ThetaRow> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double xi = k == points - 1 ? 1.0 : static_cast<double>(k) / (points - 1);
    rows.push_back({xi, theta(s, t, xi, tol)});
  }
  return rows;
}

std::string theta_csv(const std::vector<ThetaRow>& rows) {
  std::string out = "xi,theta,err\n";
  for (const auto& r : rows)
    out += detail::g12(r.xi) + "," + detail::g12(r.theta.value) + "," + detail::g12(r.theta.error_bound) + "\n";
  return out;
}

} // namespace conjdim::coding
