#include "conjdim/thermo.hpp"

#include "conjdim/errors.hpp"
#include "internal/numfmt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace conjdim::thermo {

DimensionReport analyze(const BetaProfile& profile, const ThermoSettings& settings) {
  DimensionReport r;
  r.source = profile.source_name();
  r.depth = profile.source() == BetaSource::Numeric ? profile.settings().depth : 0;

  const DependenceResult dep = dependence_test(profile, settings.dependence_tol);
  r.dependence_deviation = dep.max_deviation;
  r.verdict = dep.verdict;

  double s0 = 0.0;
  if (r.verdict == Verdict::Independent) {
    try {
      s0 = find_s0(profile);
    } catch (const DependenceSignal&) {
      r.verdict = Verdict::Dependent;
    }
  }

  const PotentialPair& pair = *profile.pair();
  if (r.verdict == Verdict::Dependent) {
    // Branch (1) of the dichotomy: no non-differentiability, bi-Lipschitz conjugacy.
    r.dim_nondiff = 0.0;
    r.hoelder_exponent = 1.0;
    r.derivative_range = {1.0, 1.0};
    r.spectrum = {SpectrumPoint{1.0, 1.0}};
    const int n = std::max(1, profile.settings().depth);
    const PressureBracket br = pressure_cylinder(pair, 1.0, 0.0, n);
    r.pressure_residual = br.estimate;
    r.bracket_lower = br.lower;
    r.bracket_upper = br.upper;
    r.beta_prime_s0 = -1.0;
    return r;
  }

  r.s0 = s0;
  r.beta_s0 = profile(s0);
  r.dim_nondiff = *r.beta_s0 + s0;
  r.beta_prime_s0 = profile.bernoulli() ? beta_prime_gibbs(profile, s0) : beta_prime(profile, s0).value;
  r.hoelder_exponent = hoelder_exponent(profile).exponent;
  r.derivative_range = derivative_range(profile);
  r.spectrum = lyapunov_spectrum(profile, spectrum_grid(profile, settings.spectrum_steps), settings.threads);

  const int n = profile.source() == BetaSource::Numeric ? profile.settings().depth : 14;
  const PressureBracket br = pressure_cylinder(pair, s0, *r.beta_s0, n);
  r.pressure_residual = br.estimate;
  r.bracket_lower = br.lower;
  r.bracket_upper = br.upper;
  return r;
}

std::string report_json(const DimensionReport& report) {
  using detail::round12;
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(round12(*v)) : nlohmann::ordered_json(nullptr);
  };
  j["schema"] = 1;
  j["verdict"] = to_string(report.verdict);
  j["dim_nondiff"] = round12(report.dim_nondiff);
  j["s0"] = opt(report.s0);
  j["beta_s0"] = opt(report.beta_s0);
  j["hoelder_exponent"] = round12(report.hoelder_exponent);
  j["derivative_range"] = {round12(report.derivative_range.lo), round12(report.derivative_range.hi)};
  auto spec = nlohmann::ordered_json::array();
  for (const auto& p : report.spectrum) spec.push_back({{"s", round12(p.s)}, {"dim", opt(p.dim)}});
  j["spectrum"] = std::move(spec);
  j["diagnostics"] = {
      {"source", report.source},
      {"depth", report.depth},
      {"dependence_deviation", round12(report.dependence_deviation)},
      {"pressure_residual", round12(report.pressure_residual)},
      {"bracket_lower", round12(report.bracket_lower)},
      {"bracket_upper", round12(report.bracket_upper)},
      {"beta_prime_s0", round12(report.beta_prime_s0)},
  };
  return j.dump(2);
}

} // namespace conjdim::thermo
