#include "conjdim/conjdim.h"

#include "conjdim/app.hpp"
#include "conjdim/coding.hpp"
#include "conjdim/errors.hpp"
#include "conjdim/thermo.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

using namespace conjdim;

struct cdim_pair {
  thermo::PairPtr pair;
};
struct cdim_profile {
  thermo::BetaProfile profile;
};
struct cdim_config {
  app::RunConfig config;
};
struct cdim_result {
  app::RunResult result;
};

namespace {

thread_local std::string g_last_error;

cdim_status fail(cdim_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

template <class Fn>
cdim_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const std::exception& e) {
    return fail(static_cast<cdim_status>(app::exit_code_for(e)), e.what());
  } catch (...) {
    return fail(CDIM_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

#define CDIM_REQUIRE(cond)                                                                                           \
  do {                                                                                                               \
    if (!(cond)) return fail(CDIM_CONFIG, "null argument: " #cond);                                                  \
  } while (0)

} // namespace

extern "C" {

const char* cdim_version(void) { return app::version(); }
const char* cdim_last_error(void) { return g_last_error.c_str(); }
void cdim_string_free(char* s) { std::free(s); }

cdim_status cdim_pair_new(const char* map_s, const char* map_t, cdim_pair** out) {
  CDIM_REQUIRE(map_s && map_t && out);
  return guarded([&] {
    auto s = maps::make_map(map_s);
    auto t = maps::make_map(map_t);
    if (s->branches() != t->branches()) throw ConfigError("maps have different numbers of branches");
    *out = new cdim_pair{std::make_shared<const thermo::PotentialPair>(s, t)};
    return CDIM_OK;
  });
}

void cdim_pair_free(cdim_pair* pair) { delete pair; }

cdim_status cdim_profile_new(const cdim_pair* pair, int depth, double tol, cdim_profile** out) {
  CDIM_REQUIRE(pair && out);
  return guarded([&] {
    thermo::SolverSettings ss;
    if (depth > 0) ss.depth = depth;
    if (tol > 0.0) ss.tol = tol;
    *out = new cdim_profile{thermo::BetaProfile::numeric(pair->pair, ss)};
    return CDIM_OK;
  });
}

cdim_status cdim_profile_closed_form(double tau, cdim_profile** out) {
  CDIM_REQUIRE(out);
  return guarded([&] {
    *out = new cdim_profile{thermo::BetaProfile::salem_closed_form(tau)};
    return CDIM_OK;
  });
}

void cdim_profile_free(cdim_profile* profile) { delete profile; }

cdim_status cdim_pressure(const cdim_pair* pair, double s, double b, int depth, double* lower, double* upper,
                          double* estimate) {
  CDIM_REQUIRE(pair);
  return guarded([&] {
    if (depth < 1) throw ConfigError("depth must be >= 1");
    const auto br = thermo::pressure_cylinder(*pair->pair, s, b, depth);
    if (lower) *lower = br.lower;
    if (upper) *upper = br.upper;
    if (estimate) *estimate = br.estimate;
    return CDIM_OK;
  });
}

cdim_status cdim_beta(const cdim_profile* profile, double s, double* out) {
  CDIM_REQUIRE(profile && out);
  return guarded([&] {
    *out = profile->profile(s);
    return CDIM_OK;
  });
}

cdim_status cdim_beta_prime(const cdim_profile* profile, double s, double* out) {
  CDIM_REQUIRE(profile && out);
  return guarded([&] {
    const auto& p = profile->profile;
    *out = p.bernoulli() ? thermo::beta_prime_gibbs(p, s) : thermo::beta_prime(p, s).value;
    return CDIM_OK;
  });
}

cdim_status cdim_s0(const cdim_profile* profile, double* out) {
  CDIM_REQUIRE(profile && out);
  return guarded([&] {
    *out = thermo::find_s0(profile->profile);
    return CDIM_OK;
  });
}

cdim_status cdim_dim(const cdim_profile* profile, double* out) {
  CDIM_REQUIRE(profile && out);
  return guarded([&] {
    if (thermo::dependence_test(profile->profile).verdict == thermo::Verdict::Dependent) *out = 0.0;
    else *out = thermo::dim_nondiff(profile->profile);
    return CDIM_OK;
  });
}

cdim_status cdim_hoelder(const cdim_profile* profile, double* out) {
  CDIM_REQUIRE(profile && out);
  return guarded([&] {
    *out = thermo::hoelder_exponent(profile->profile).exponent;
    return CDIM_OK;
  });
}

cdim_status cdim_report_json(const cdim_profile* profile, int threads, char** out) {
  CDIM_REQUIRE(profile && out);
  return guarded([&] {
    thermo::ThermoSettings ts;
    ts.solver = profile->profile.settings();
    ts.threads = threads > 0 ? threads : 1;
    *out = dup(thermo::report_json(thermo::analyze(profile->profile, ts)));
    return CDIM_OK;
  });
}

cdim_status cdim_theta(const cdim_pair* pair, double xi, double tol, double* value, double* error_bound) {
  CDIM_REQUIRE(pair && value);
  return guarded([&] {
    const auto v = coding::theta(pair->pair->s(), pair->pair->t(), xi, tol > 0.0 ? tol : 1e-9);
    *value = v.value;
    if (error_bound) *error_bound = v.error_bound;
    return CDIM_OK;
  });
}

cdim_status cdim_config_new(cdim_config** out) {
  CDIM_REQUIRE(out);
  return guarded([&] {
    *out = new cdim_config{};
    return CDIM_OK;
  });
}

cdim_status cdim_config_set(cdim_config* config, const char* key, const char* value) {
  CDIM_REQUIRE(config && key && value);
  return guarded([&] {
    config->config.set(key, value);
    return CDIM_OK;
  });
}

cdim_status cdim_config_load_text(cdim_config* config, const char* text) {
  CDIM_REQUIRE(config && text);
  return guarded([&] {
    config->config.load_ini(text);
    return CDIM_OK;
  });
}

cdim_status cdim_config_from_output(const char* output_text, cdim_config** out) {
  CDIM_REQUIRE(output_text && out);
  return guarded([&] {
    *out = new cdim_config{app::config_from_output(output_text)};
    return CDIM_OK;
  });
}

cdim_status cdim_config_canonical(const cdim_config* config, char** out) {
  CDIM_REQUIRE(config && out);
  return guarded([&] {
    *out = dup(config->config.canonical());
    return CDIM_OK;
  });
}

void cdim_config_free(cdim_config* config) { delete config; }

cdim_status cdim_run(const cdim_config* config, cdim_result** out) {
  CDIM_REQUIRE(config && out);
  return guarded([&] {
    auto* r = new cdim_result{app::run(config->config)};
    *out = r;
    if (r->result.exit_code == CDIM_PROBE) return fail(CDIM_PROBE, "probe missed its threshold");
    return CDIM_OK;
  });
}

const char* cdim_result_output(const cdim_result* r) { return r ? r->result.output.c_str() : ""; }
const char* cdim_result_summary(const cdim_result* r) { return r ? r->result.summary.c_str() : ""; }
const char* cdim_result_svg(const cdim_result* r) { return r ? r->result.svg.c_str() : ""; }
int cdim_result_exit_code(const cdim_result* r) { return r ? r->result.exit_code : 1; }
void cdim_result_free(cdim_result* r) { delete r; }

} // extern "C"
