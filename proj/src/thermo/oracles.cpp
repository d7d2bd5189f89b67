#include "conjdim/thermo.hpp"

#include "conjdim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conjdim::thermo {

namespace {

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// p_i ~ exp(g phi_i - c chi_i) with c chosen so that sum p_i chi_i = 0.
std::vector<double> tilted(const std::vector<double>& phi, const std::vector<double>& chi, double g) {
  const std::size_t d = phi.size();
  auto weights = [&](double c) {
    std::vector<double> w(d);
    double top = -INFINITY;
    for (std::size_t i = 0; i < d; ++i) top = std::max(top, g * phi[i] - c * chi[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < d; ++i) z += w[i] = std::exp(g * phi[i] - c * chi[i] - top);
    for (double& x : w) x /= z;
    return w;
  };
  // The mean of chi is strictly decreasing in c.
  double lo = -1.0, hi = 1.0;
  while (dot(weights(lo), chi) < 0.0) lo *= 2.0;
  while (dot(weights(hi), chi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (dot(weights(mid), chi) > 0.0 ? lo : hi) = mid;
  }
  return weights(0.5 * (lo + hi));
}

} // namespace

VariationalResult variational_dim(const std::vector<double>& phi, const std::vector<double>& psi) {
  if (phi.size() != psi.size() || phi.size() < 2) throw ConfigError("variational_dim: mismatched potentials");
  if (phi.size() > 8) throw ConfigError("variational_dim supports at most 8 branches");
  const std::size_t d = phi.size();
  std::vector<double> chi(d);
  double chi_min = INFINITY, chi_max = -INFINITY, scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    chi[i] = psi[i] - phi[i];
    chi_min = std::min(chi_min, chi[i]);
    chi_max = std::max(chi_max, chi[i]);
    scale = std::max(scale, std::abs(phi[i]));
  }
  VariationalResult r;
  if (chi_max - chi_min <= 1e-14 * scale && std::abs(chi_max) <= 1e-14 * scale) {
    r.status = VariationalStatus::Dependent;
    return r;
  }
  if (!(chi_min < 0.0 && chi_max > 0.0)) {
    r.status = VariationalStatus::Infeasible;
    return r;
  }

  if (d == 2) {
    const double p1 = chi[1] / (chi[1] - chi[0]);
    r.weights = {p1, 1.0 - p1};
  } else {
    // Dinkelbach iteration on the ratio H(p) / (-sum p phi).
    double g = 0.0;
    for (int it = 0; it < 200; ++it) {
      r.weights = tilted(phi, chi, g);
      const double next = entropy(r.weights) / -dot(r.weights, phi);
      if (std::abs(next - g) < 1e-15) break;
      g = next;
    }
  }
  r.dim = entropy(r.weights) / -dot(r.weights, phi);
  return r;
}

VariationalResult variational_dim(const PotentialPair& pair) {
  if (!pair.piecewise_linear()) throw ConfigError("variational_dim needs a piecewise-linear pair");
  return variational_dim(pair.phi_constants(), pair.psi_constants());
}

double SalemClosedForms::beta(double s) const { return std::log2(std::pow(tau, s) + std::pow(1.0 - tau, s)); }

SalemClosedForms salem_closed_forms(double tau) {
  if (!(tau > 0.0 && tau < 1.0) || tau == 0.5) throw ConfigError("salem tau must lie in (0,1) without 1/2");
  SalemClosedForms c;
  c.tau = tau;
  const double l = std::log2(tau), r = std::log2(1.0 - tau);
  // 1 = -p log2(tau) - (1-p) log2(1-tau)
  c.p = (1.0 + r) / (r - l);
  c.dim = -(c.p * std::log2(c.p) + (1.0 - c.p) * std::log2(1.0 - c.p));
  // beta'(s0) = -1  <=>  (tau/(1-tau))^s0 = -ln(2(1-tau)) / ln(2 tau)
  c.s0 = std::log(-std::log(2.0 * (1.0 - tau)) / std::log(2.0 * tau)) / std::log(tau / (1.0 - tau));
  return c;
}

} // namespace conjdim::thermo
