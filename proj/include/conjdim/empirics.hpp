#pragma once

#include "conjdim/thermo.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace conjdim::empirics {

/// splitmix64 finaliser; per-sample seeds are derived as mix(seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// Bernoulli equilibrium state of a piecewise-linear pair at parameter s.
struct GibbsSamplerPL {
  double s = 0.0;
  std::vector<double> weights;
  std::vector<double> phi, psi, chi;
  std::uint64_t seed = 0;

  static GibbsSamplerPL at(const thermo::BetaProfile& profile, double s, std::uint64_t seed);
  /// Lebesgue measure: i.i.d. digits with the cell widths of S.
  static GibbsSamplerPL lebesgue(const thermo::PotentialPair& pair, std::uint64_t seed);

  double mean_chi() const;
};

/// Lazy i.i.d. digit source for one sample.
class DigitStream {
public:
  DigitStream(const std::vector<double>& weights, std::uint64_t seed);
  int next();

private:
  std::vector<double> cumulative_;
  std::mt19937_64 rng_;
};

/// `count` streams of `n_digits` symbols; stream i uses mix_seed(seed, i).
std::vector<std::vector<int>> sample_gibbs(const GibbsSamplerPL& sampler, int n_digits, int count);

/// Running Birkhoff sum of chi along one digit stream.
struct TrajectoryStats {
  long steps = 0;
  double sum = 0.0;
  double max = 0.0;
  double min = 0.0;
  long first_above = -1; // first n with S_n chi > c
  long first_below = -1; // first n with S_n chi < -c
  bool late_above = false; // S_n chi > c for some n in the second half

  void push(double chi, double c, long horizon);
};

struct ProbeSettings {
  std::uint64_t seed = 1;
  int threads = 1;
};

// ---------------------------------------------------------------------------

struct OscillationResult {
  double s = 0.0;
  double c = 0.0;
  long length = 0;
  double mean_chi = 0.0;
  double fraction = 0.0;            // crossed both +c and -c
  double upper_fraction = 0.0;      // crossed +c at some time
  double lower_fraction = 0.0;      // crossed -c at some time
  double late_upper_fraction = 0.0; // crossed +c during the second half
  std::vector<TrajectoryStats> samples;
};
OscillationResult oscillation_check(const thermo::BetaProfile& profile, double s, long length, int count, double c,
                                    const ProbeSettings& settings = {});

/// log D_Theta(xi, eta_n) for a point given by its S-digits, with eta_n the
/// endpoint of the level-n cylinder farther from xi. Piecewise-linear pairs.
double log_endpoint_quotient(const thermo::PotentialPair& pair, const std::vector<int>& digits, int n);
/// Both one-sided quotients (against lo and hi of the level-n cylinder).
std::pair<double, double> log_one_sided_quotients(const thermo::PotentialPair& pair, const std::vector<int>& digits,
                                                   int n);

struct LevelSummary {
  int level = 0;
  double median = 0.0; // median quotient
  double below_1e_2 = 0.0;
  double below_1e_4 = 0.0;
};
struct LebesgueResult {
  std::vector<LevelSummary> levels;
  double fitted_rate = 0.0;   // exp(slope of log median against n)
  double expected_rate = 0.0; // exp(E_lambda chi), piecewise-linear pairs; 0 when unknown
  double median_final = 0.0;
  std::vector<std::vector<double>> log_quotients; // [sample][level index]
};
/// Quotients at levels 5, 10, ..., n_scale for `count` Lebesgue-random points.
LebesgueResult lebesgue_zero_check(const thermo::PotentialPair& pair, int count, int n_scale,
                                   const ProbeSettings& settings = {});

struct BlowupResult {
  double s = 0.0;
  long length = 0;
  double threshold = 0.0;
  double fraction = 0.0;  // quotient above threshold at level N
  double decaying = 0.0;  // quotient below 1/threshold at level N
  double mean_chi = 0.0;
  std::vector<double> log_quotients;
};
BlowupResult blowup_probe(const thermo::BetaProfile& profile, double s, int count, long length,
                          double threshold = 1e3, const ProbeSettings& settings = {});

struct HolderProbeResult {
  double s = 0.0;
  int fit_depth = 10;
  double fitted_log_bound = 0.0; // max log ratio over all words up to fit_depth
  long pairs = 0;
  long violations = 0;
  std::map<int, double> max_log_ratio; // per depth
  double growth = 0.0;                 // max ratio at the deepest level / at half that depth
};
/// |Theta(x) - Theta(y)| / |x - y|^s on cylinder-endpoint pairs built from a
/// random prefix followed by a block of 1s or ds, up to `max_depth`.
HolderProbeResult s_holder_probe(const thermo::PotentialPair& pair, double s, long pairs_count, int max_depth = 30,
                                 const ProbeSettings& settings = {});

// ---------------------------------------------------------------------------
// Experiment drivers. Rows carry an error string instead of aborting.

struct MollifyRow {
  int windows = 0;
  double dim = 0.0;
  double s0 = 0.0;
  double bracket_width = 0.0;
  std::string error;
};
struct MollifyTable {
  double tau = 0.0;
  double closed_form = 0.0;
  std::vector<MollifyRow> rows;
};
MollifyTable mollify_convergence(double tau, const std::vector<int>& windows, int depth, int threads = 1);

struct SweepRow {
  double tau = 0.0;
  double dim = 0.0;
  double s0 = 0.0;
  double second_difference = 0.0; // NaN at the ends of the grid
  std::string error;
};
struct SweepTable {
  std::vector<SweepRow> rows;
  double max_second_difference = 0.0;
};
SweepTable smooth_dependence_sweep(const std::vector<double>& taus, int depth, int threads = 1);

struct SalemRow {
  double tau = 0.0;
  double dim_numeric = 0.0;
  double dim_closed = 0.0;
  double dim_variational = 0.0;
  double p = 0.0;
  double s0 = 0.0;
};
std::vector<SalemRow> salem_sweep(const std::vector<double>& taus, int depth, int threads = 1);

} // namespace conjdim::empirics
