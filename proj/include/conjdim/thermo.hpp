#pragma once

#include "conjdim/coding.hpp"
#include "conjdim/maps.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace conjdim::thermo {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Per-cylinder data at one depth. For piecewise-linear pairs the entries are
/// symbol-count classes weighted by `log_mult` (multinomial coefficient);
/// otherwise one entry per word and `log_mult` is empty.
struct CylinderLevel {
  int depth = 0;
  std::vector<double> log_mult;
  std::vector<double> phi_lo, phi_hi; // enclosure of S_n phi over the cylinder
  std::vector<double> psi_lo, psi_hi; // enclosure of S_n psi
  std::vector<double> len_s, len_t;   // log cylinder lengths under S and T

  std::size_t size() const { return phi_lo.size(); }
  double mult(std::size_t i) const { return log_mult.empty() ? 0.0 : log_mult[i]; }
};

struct CylinderTable {
  CylinderLevel top;  // depth n
  CylinderLevel prev; // depth n - 1; at n = 1 this holds the empty word
};

/// The potentials phi = log (S_a^{-1})' and psi = log (T_a^{-1})' of a pair of
/// maps sharing the alphabet, together with cached cylinder tables.
class PotentialPair {
public:
  PotentialPair(maps::MapPtr s, maps::MapPtr t, std::size_t budget = std::size_t{1} << 22);

  const maps::BranchMap& s() const { return *s_; }
  const maps::BranchMap& t() const { return *t_; }
  maps::MapPtr s_ptr() const { return s_; }
  maps::MapPtr t_ptr() const { return t_; }
  int branches() const { return s_->branches(); }
  bool piecewise_linear() const { return s_->piecewise_linear() && t_->piecewise_linear(); }
  std::size_t budget() const { return budget_; }

  /// Piecewise-linear pairs: per-symbol constants phi_i and psi_i.
  std::vector<double> phi_constants() const;
  std::vector<double> psi_constants() const;

  struct Sums {
    Interval phi, psi;
    Interval chi() const { return {psi.lo - phi.hi, psi.hi - phi.lo}; }
  };
  /// Enclosures of S_n phi and S_n psi over the cylinder of `w`.
  Sums birkhoff(const coding::Word& w) const;

  /// Cylinder table at `depth`; built on first use and cached.
  std::shared_ptr<const CylinderTable> table(int depth) const;

  PotentialPair swapped() const { return PotentialPair(t_, s_, budget_); }

private:
  maps::MapPtr s_, t_;
  std::size_t budget_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::shared_ptr<const CylinderTable>> tables_;
};

using PairPtr = std::shared_ptr<const PotentialPair>;

/// Enclosure of P(s phi + b psi) at cylinder depth n. `estimate` is the
/// ratio of consecutive cylinder-length partition sums, clamped into the
/// bracket; `slope_b` is its derivative in b.
struct PressureBracket {
  double lower = 0.0;
  double upper = 0.0;
  double estimate = 0.0;
  double slope_b = 0.0;
  int depth = 0;
  double width() const { return upper - lower; }
};

PressureBracket pressure_cylinder(const PotentialPair& pair, double s, double b, int depth);

/// Checks lower(n) <= lower(2n) <= upper(2n) <= upper(n) + 1e-12; throws
/// ConvergenceError on violation.
void check_bracket_nesting(const PotentialPair& pair, double s, double b, int depth);

struct SolverSettings {
  int depth = 14;
  double tol = 1e-13;
  /// Largest accepted bracket width at the solution; wider means the depth is
  /// too small to pin the root.
  double bracket_limit = 1.0;
  double fd_step = 1e-4;
  double domain_lo = -64.0;
  double domain_hi = 64.0;
};

/// b with P(s phi + b psi) = 0.
double beta_solve(const PotentialPair& pair, double s, const SolverSettings& settings);

enum class BetaSource { ClosedFormSalem, Numeric };

/// beta(s) defined by P(s phi + beta(s) psi) = 0, with memoised evaluation.
class BetaProfile {
public:
  static BetaProfile numeric(PairPtr pair, SolverSettings settings = {});
  static BetaProfile salem_closed_form(double tau);

  double operator()(double s) const;
  double tilde(double s) const { return (*this)(s) + s; }

  BetaSource source() const { return source_; }
  const SolverSettings& settings() const { return settings_; }
  const PotentialPair* pair() const { return pair_.get(); }
  PairPtr pair_ptr() const { return pair_; }

  /// Per-symbol (phi_i, psi_i) when the underlying potentials are locally
  /// constant (piecewise-linear pairs and the closed form).
  bool bernoulli() const { return !phi_.empty(); }
  const std::vector<double>& phi_constants() const { return phi_; }
  const std::vector<double>& psi_constants() const { return psi_; }
  std::string source_name() const;

private:
  BetaSource source_ = BetaSource::Numeric;
  PairPtr pair_;
  SolverSettings settings_;
  double tau_ = 0.0;
  std::vector<double> phi_, psi_;
  struct Cache {
    std::mutex mutex;
    std::map<double, double> values;
    std::optional<Interval> range;
  };
  friend Interval derivative_range(const BetaProfile& profile);
  std::shared_ptr<Cache> cache_;
};

/// Closure of the range of -beta'.
Interval derivative_range(const BetaProfile& profile);

struct Derivative {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Central difference of beta with step settings().fd_step; one-sided near the
/// edge of the solver domain with a doubled error estimate.
Derivative beta_prime(const BetaProfile& profile, double s);
/// Exact Gibbs ratio -sum w_i phi_i / sum w_i psi_i with
/// w_i ~ exp(s phi_i + beta(s) psi_i). Bernoulli profiles only.
double beta_prime_gibbs(const BetaProfile& profile, double s);
/// Normalised Gibbs weights of the Bernoulli equilibrium state at s.
std::vector<double> gibbs_weights(const BetaProfile& profile, double s);

/// Unique minimiser of beta-tilde on (0,1); |beta'(s0) + 1| < 1e-8.
double find_s0(const BetaProfile& profile);
double dim_nondiff(const BetaProfile& profile);

/// inf_t (beta(t) + s t); nullopt marks an empty level set.
std::optional<double> legendre(const BetaProfile& profile, double s);

struct SpectrumPoint {
  double s = 0.0;
  std::optional<double> dim;
};
std::vector<SpectrumPoint> lyapunov_spectrum(const BetaProfile& profile, const std::vector<double>& grid,
                                             int threads = 1);
/// `steps` uniform points over the derivative range, plus s = 1 and s = -beta'(1).
std::vector<double> spectrum_grid(const BetaProfile& profile, int steps);

struct HoelderEstimate {
  double exponent = 1.0;
  double rho = 1.0;                  // sup -beta'
  double rho_numeric = 1.0;          // sampled -beta' and periodic orbit ratios
  std::optional<double> rho_exact;   // max phi_i / psi_i for Bernoulli profiles
};
HoelderEstimate hoelder_exponent(const BetaProfile& profile);

enum class Verdict { Dependent, Independent };
std::string to_string(Verdict v);

struct DependenceResult {
  Verdict verdict = Verdict::Independent;
  double max_deviation = 0.0;
  double tol = 0.0;
};
/// Samples beta on 31 points of [-1, 2]; dependent iff beta(s) = 1 - s there.
/// tol <= 0 selects 1e-6 for piecewise-linear pairs and 1e-4 otherwise.
DependenceResult dependence_test(const BetaProfile& profile, double tol = 0.0);

enum class VariationalStatus { Ok, Dependent, Infeasible };
struct VariationalResult {
  VariationalStatus status = VariationalStatus::Ok;
  double dim = 0.0;
  std::vector<double> weights;
};
/// sup H(p) / (-sum p_i phi_i) over Bernoulli p with sum p_i (phi_i - psi_i) = 0.
VariationalResult variational_dim(const PotentialPair& pair);
VariationalResult variational_dim(const std::vector<double>& phi, const std::vector<double>& psi);

struct SalemClosedForms {
  double tau = 0.0;
  double p = 0.0;
  double dim = 0.0;
  double s0 = 0.0;
  double beta(double s) const;
};
SalemClosedForms salem_closed_forms(double tau);

struct ThermoSettings {
  SolverSettings solver;
  double dependence_tol = 0.0;
  int spectrum_steps = 101;
  int threads = 1;
};

struct DimensionReport {
  Verdict verdict = Verdict::Independent;
  double dim_nondiff = 0.0;
  std::optional<double> s0;
  std::optional<double> beta_s0;
  double hoelder_exponent = 1.0;
  Interval derivative_range;
  std::vector<SpectrumPoint> spectrum;
  // diagnostics
  std::string source;
  int depth = 0;
  double dependence_deviation = 0.0;
  double pressure_residual = 0.0;
  double bracket_lower = 0.0;
  double bracket_upper = 0.0;
  double beta_prime_s0 = 0.0;
};

DimensionReport analyze(const BetaProfile& profile, const ThermoSettings& settings = {});
/// JSON object with `schema = 1`; numbers carry 12 significant digits.
std::string report_json(const DimensionReport& report);

} // namespace conjdim::thermo
