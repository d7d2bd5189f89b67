#include "conjdim/thermo.hpp"

#include "conjdim/errors.hpp"
#include "internal/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conjdim::thermo {

namespace {

// Composite inverse branch data for one word under one map: images of 0 and 1,
// log derivatives there, and a bound on the oscillation of the log derivative.
struct Node {
  double p0 = 0.0, p1 = 1.0;
  double l0 = 0.0, l1 = 0.0;
  double var = 0.0;
};

Node prepend(const maps::BranchMap& m, int a, const Node& n) {
  Node out;
  out.p0 = m.inverse_branch(a, n.p0);
  out.p1 = m.inverse_branch(a, n.p1);
  if (m.piecewise_linear()) {
    const double lw = m.log_width(a);
    out.l0 = n.l0 + lw;
    out.l1 = n.l1 + lw;
    out.var = 0.0;
  } else {
    out.l0 = n.l0 - std::log(m.derivative(out.p0));
    out.l1 = n.l1 - std::log(m.derivative(out.p1));
    out.var = n.var + m.log_derivative_variation(out.p0, out.p1);
  }
  return out;
}

Interval enclosure(const Node& n) {
  const double a = std::min(n.l0, n.l1), b = std::max(n.l0, n.l1);
  return {std::min(a, b - n.var), std::max(b, a + n.var)};
}

double log_length(const maps::BranchMap& m, const Node& n, int depth) {
  if (m.piecewise_linear()) return n.l0;
  const double w = n.p1 - n.p0;
  if (!(w > 4.0 * (std::nextafter(n.p1, 2.0) - n.p1)))
    throw PrecisionError("cylinders of '" + m.label() + "' at depth " + std::to_string(depth) +
                         " fall below double resolution; lower the depth");
  return std::log(w);
}

void push(CylinderLevel& lvl, const maps::BranchMap& s, const maps::BranchMap& t, const Node& ns, const Node& nt,
          int depth) {
  const Interval a = enclosure(ns), b = enclosure(nt);
  lvl.phi_lo.push_back(a.lo);
  lvl.phi_hi.push_back(a.hi);
  lvl.psi_lo.push_back(b.lo);
  lvl.psi_hi.push_back(b.hi);
  lvl.len_s.push_back(log_length(s, ns, depth));
  lvl.len_t.push_back(log_length(t, nt, depth));
}

void reserve(CylinderLevel& lvl, std::size_t n) {
  for (auto* v : {&lvl.phi_lo, &lvl.phi_hi, &lvl.psi_lo, &lvl.psi_hi, &lvl.len_s, &lvl.len_t}) v->reserve(n);
}

// Words of length n are reached from the empty word by prepending symbols, so a
// depth-first walk yields level n and level n-1 while holding only one path.
struct WordWalker {
  const maps::BranchMap& s;
  const maps::BranchMap& t;
  int depth;
  CylinderTable& table;

  void walk(int k, const Node& ns, const Node& nt) {
    if (k == depth - 1) push(table.prev, s, t, ns, nt, k);
    if (k == depth) {
      push(table.top, s, t, ns, nt, k);
      return;
    }
    for (int a = 1; a <= s.branches(); ++a) walk(k + 1, prepend(s, a, ns), prepend(t, a, nt));
  }
};

double binomial_classes(int n, int d) {
  // C(n + d - 1, d - 1)
  return std::exp(std::lgamma(n + d) - std::lgamma(n + 1) - std::lgamma(d));
}

void composition_level(CylinderLevel& lvl, int n, const std::vector<double>& phi, const std::vector<double>& psi) {
  const int d = static_cast<int>(phi.size());
  lvl.depth = n;
  std::vector<int> counts(static_cast<std::size_t>(d), 0);
  const double log_nfact = std::lgamma(n + 1.0);
  auto emit = [&] {
    double lm = log_nfact, f = 0.0, g = 0.0;
    for (int i = 0; i < d; ++i) {
      const int c = counts[static_cast<std::size_t>(i)];
      lm -= std::lgamma(c + 1.0);
      f += c * phi[static_cast<std::size_t>(i)];
      g += c * psi[static_cast<std::size_t>(i)];
    }
    lvl.log_mult.push_back(lm);
    lvl.phi_lo.push_back(f);
    lvl.phi_hi.push_back(f);
    lvl.psi_lo.push_back(g);
    lvl.psi_hi.push_back(g);
    lvl.len_s.push_back(f);
    lvl.len_t.push_back(g);
  };
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == d - 1) {
      counts[static_cast<std::size_t>(i)] = left;
      emit();
      return;
    }
    for (int c = left; c >= 0; --c) {
      counts[static_cast<std::size_t>(i)] = c;
      self(self, i + 1, left - c);
    }
  };
  rec(rec, 0, n);
}

// Max-shifted accumulation of log sum exp.
struct LogSumExp {
  double shift = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double value() const { return shift + std::log(sum); }
};

} // namespace

PotentialPair::PotentialPair(maps::MapPtr s, maps::MapPtr t, std::size_t budget)
    : s_(std::move(s)), t_(std::move(t)), budget_(budget) {
  if (!s_ || !t_) throw ConfigError("potential pair needs two maps");
  if (s_->branches() != t_->branches())
    throw ConfigError("maps '" + s_->label() + "' and '" + t_->label() + "' have different numbers of branches");
}

std::vector<double> PotentialPair::phi_constants() const {
  if (!s_->piecewise_linear()) throw ConfigError("phi is not locally constant for '" + s_->label() + "'");
  std::vector<double> out;
  for (int a = 1; a <= branches(); ++a) out.push_back(s_->log_width(a));
  return out;
}

std::vector<double> PotentialPair::psi_constants() const {
  if (!t_->piecewise_linear()) throw ConfigError("psi is not locally constant for '" + t_->label() + "'");
  std::vector<double> out;
  for (int a = 1; a <= branches(); ++a) out.push_back(t_->log_width(a));
  return out;
}

PotentialPair::Sums PotentialPair::birkhoff(const coding::Word& w) const {
  w.validate(branches());
  Node ns, nt;
  for (std::size_t k = w.size(); k-- > 0;) {
    ns = prepend(*s_, w[k], ns);
    nt = prepend(*t_, w[k], nt);
  }
  return {enclosure(ns), enclosure(nt)};
}

std::shared_ptr<const CylinderTable> PotentialPair::table(int depth) const {
  if (depth < 1) throw ConfigError("cylinder depth must be >= 1");
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = tables_.find(depth); it != tables_.end()) return it->second;

  auto table = std::make_shared<CylinderTable>();
  const int d = branches();
  if (piecewise_linear()) {
    const double classes = binomial_classes(depth, d);
    if (classes > static_cast<double>(budget_))
      throw ConfigError("depth " + std::to_string(depth) + " needs " + detail::shortest(classes) +
                        " symbol-count classes, above the budget " + std::to_string(budget_));
    const auto phi = phi_constants(), psi = psi_constants();
    composition_level(table->top, depth, phi, psi);
    composition_level(table->prev, depth - 1, phi, psi);
  } else {
    const double words = std::pow(static_cast<double>(d), depth);
    if (words > static_cast<double>(budget_))
      throw ConfigError("depth " + std::to_string(depth) + " needs " + detail::shortest(words) +
                        " cylinders, above the budget " + std::to_string(budget_));
    table->top.depth = depth;
    table->prev.depth = depth - 1;
    reserve(table->top, static_cast<std::size_t>(words));
    reserve(table->prev, static_cast<std::size_t>(words / d));
    WordWalker{*s_, *t_, depth, *table}.walk(0, Node{}, Node{});
  }
  std::shared_ptr<const CylinderTable> out = std::move(table);
  tables_.emplace(depth, out);
  return out;
}

PressureBracket pressure_cylinder(const PotentialPair& pair, double s, double b, int depth) {
  if (!std::isfinite(s) || !std::isfinite(b)) throw ConfigError("pressure: non-finite parameter");
  const auto tab = pair.table(depth);
  const CylinderLevel& top = tab->top;
  const CylinderLevel& prev = tab->prev;

  auto sup_at = [&](std::size_t i) {
    return top.mult(i) + (s >= 0 ? s * top.phi_hi[i] : s * top.phi_lo[i]) +
           (b >= 0 ? b * top.psi_hi[i] : b * top.psi_lo[i]);
  };
  auto inf_at = [&](std::size_t i) {
    return top.mult(i) + (s >= 0 ? s * top.phi_lo[i] : s * top.phi_hi[i]) +
           (b >= 0 ? b * top.psi_lo[i] : b * top.psi_hi[i]);
  };
  auto len_at = [&](const CylinderLevel& l, std::size_t i) { return l.mult(i) + s * l.len_s[i] + b * l.len_t[i]; };

  LogSumExp up, lo, cur, old;
  for (std::size_t i = 0; i < top.size(); ++i) {
    up.shift = std::max(up.shift, sup_at(i));
    lo.shift = std::max(lo.shift, inf_at(i));
    cur.shift = std::max(cur.shift, len_at(top, i));
  }
  double mean_cur = 0.0, mean_old = 0.0;
  for (std::size_t i = 0; i < top.size(); ++i) {
    up.sum += std::exp(sup_at(i) - up.shift);
    lo.sum += std::exp(inf_at(i) - lo.shift);
    const double w = std::exp(len_at(top, i) - cur.shift);
    cur.sum += w;
    mean_cur += w * top.len_t[i];
  }
  for (std::size_t i = 0; i < prev.size(); ++i) old.shift = std::max(old.shift, len_at(prev, i));
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double w = std::exp(len_at(prev, i) - old.shift);
    old.sum += w;
    mean_old += w * prev.len_t[i];
  }

  PressureBracket br;
  br.depth = depth;
  br.upper = up.value() / depth;
  br.lower = lo.value() / depth;
  if (br.lower > br.upper) std::swap(br.lower, br.upper);
  br.estimate = cur.value() - old.value();
  br.slope_b = mean_cur / cur.sum - mean_old / old.sum;
  if (br.estimate > br.upper || br.estimate < br.lower) {
    br.estimate = std::clamp(br.estimate, br.lower, br.upper);
    double m = 0.0, z = 0.0;
    const bool at_upper = br.estimate == br.upper;
    for (std::size_t i = 0; i < top.size(); ++i) {
      const double w = std::exp((at_upper ? sup_at(i) - up.shift : inf_at(i) - lo.shift));
      z += w;
      m += w * ((b >= 0) == at_upper ? top.psi_hi[i] : top.psi_lo[i]);
    }
    br.slope_b = m / z / depth;
  }
  return br;
}

void check_bracket_nesting(const PotentialPair& pair, double s, double b, int depth) {
  const PressureBracket a = pressure_cylinder(pair, s, b, depth);
  const PressureBracket c = pressure_cylinder(pair, s, b, 2 * depth);
  constexpr double slack = 1e-12;
  if (!(a.lower <= c.lower + slack && c.lower <= c.upper + slack && c.upper <= a.upper + slack))
    throw ConvergenceError("pressure brackets do not nest at s=" + detail::shortest(s) + ", b=" + detail::shortest(b) +
                           ": [" + detail::shortest(a.lower) + ", " + detail::shortest(a.upper) + "] at depth " +
                           std::to_string(depth) + " vs [" + detail::shortest(c.lower) + ", " +
                           detail::shortest(c.upper) + "] at depth " + std::to_string(2 * depth));
}

double beta_solve(const PotentialPair& pair, double s, const SolverSettings& settings) {
  if (!(settings.tol > 0.0)) throw ConfigError("solver tol must be positive");
  if (!(s >= settings.domain_lo && s <= settings.domain_hi))
    throw ConfigError("s=" + detail::shortest(s) + " outside the solver domain [" +
                      detail::shortest(settings.domain_lo) + ", " + detail::shortest(settings.domain_hi) + "]");
  const int n = settings.depth;
  auto eval = [&](double b) { return pressure_cylinder(pair, s, b, n); };

  // Pressure is strictly decreasing in b; bracket the root by doubling steps.
  double b = 1.0 - s;
  PressureBracket pb = eval(b);
  double lo = b, hi = b, flo = pb.estimate, fhi = pb.estimate;
  double step = 0.25 * std::max(1.0, std::abs(s));
  for (int k = 0; k < 200 && !(flo >= 0.0 && fhi <= 0.0); ++k) {
    if (fhi > 0.0) {
      lo = hi;
      flo = fhi;
      hi += step;
      fhi = eval(hi).estimate;
    } else {
      hi = lo;
      fhi = flo;
      lo -= step;
      flo = eval(lo).estimate;
    }
    step *= 2.0;
  }
  if (!(flo >= 0.0 && fhi <= 0.0))
    throw ConvergenceError("beta_solve: could not bracket the pressure root at s=" + detail::shortest(s));

  // Safeguarded Newton on the bracket.
  double x = std::clamp(b, lo, hi);
  double fx = x == b ? pb.estimate : eval(x).estimate;
  double slope = pb.slope_b;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const double eff = settings.tol * std::max({1.0, std::abs(s), std::abs(x)});
    if (std::abs(fx) < eff || hi - lo < eff) {
      converged = true;
      break;
    }
    if (fx > 0.0) lo = x;
    else hi = x;
    double next = slope < 0.0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) {
      converged = true;
      break;
    }
    x = next;
    pb = eval(x);
    fx = pb.estimate;
    slope = pb.slope_b;
  }
  if (!converged) throw ConvergenceError("beta_solve: no convergence at s=" + detail::shortest(s));

  const PressureBracket fin = eval(x);
  const double limit = settings.bracket_limit * std::max({1.0, std::abs(s), std::abs(x)});
  if (fin.width() > limit)
    throw ConvergenceError("pressure bracket width " + detail::shortest(fin.width()) + " at s=" + detail::shortest(s) +
                           " exceeds " + detail::shortest(limit) + "; raise the depth above " + std::to_string(n));
  return x;
}

} // namespace conjdim::thermo
