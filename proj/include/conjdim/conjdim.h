#ifndef CONJDIM_H
#define CONJDIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CDIM_API __declspec(dllexport)
#else
#define CDIM_API __attribute__((visibility("default")))
#endif

typedef enum cdim_status {
  CDIM_OK = 0,
  CDIM_INTERNAL = 1,
  CDIM_CONFIG = 2,
  CDIM_CONVERGENCE = 3,
  CDIM_PROBE = 4
} cdim_status;

typedef struct cdim_pair cdim_pair;
typedef struct cdim_profile cdim_profile;
typedef struct cdim_config cdim_config;
typedef struct cdim_result cdim_result;

CDIM_API const char* cdim_version(void);
/* Message of the last failed call on this thread; "" when none. */
CDIM_API const char* cdim_last_error(void);
/* Frees strings returned through char** out-parameters. */
CDIM_API void cdim_string_free(char* s);

/* Maps are given as text, e.g. "salem:tau=0.2", "sine:tau=0.3", "doubling:d=2". */
CDIM_API cdim_status cdim_pair_new(const char* map_s, const char* map_t, cdim_pair** out);
CDIM_API void cdim_pair_free(cdim_pair* pair);

/* depth <= 0 and tol <= 0 select the defaults (14, 1e-13). */
CDIM_API cdim_status cdim_profile_new(const cdim_pair* pair, int depth, double tol, cdim_profile** out);
CDIM_API cdim_status cdim_profile_closed_form(double tau, cdim_profile** out);
CDIM_API void cdim_profile_free(cdim_profile* profile);

CDIM_API cdim_status cdim_pressure(const cdim_pair* pair, double s, double b, int depth, double* lower,
                                   double* upper, double* estimate);
CDIM_API cdim_status cdim_beta(const cdim_profile* profile, double s, double* out);
CDIM_API cdim_status cdim_beta_prime(const cdim_profile* profile, double s, double* out);
CDIM_API cdim_status cdim_s0(const cdim_profile* profile, double* out);
CDIM_API cdim_status cdim_dim(const cdim_profile* profile, double* out);
CDIM_API cdim_status cdim_hoelder(const cdim_profile* profile, double* out);
/* Full dimension report as JSON; free with cdim_string_free. */
CDIM_API cdim_status cdim_report_json(const cdim_profile* profile, int threads, char** out);
CDIM_API cdim_status cdim_theta(const cdim_pair* pair, double xi, double tol, double* value, double* error_bound);

/* Run configuration, keyed like the command-line flags. */
CDIM_API cdim_status cdim_config_new(cdim_config** out);
CDIM_API cdim_status cdim_config_set(cdim_config* config, const char* key, const char* value);
CDIM_API cdim_status cdim_config_load_text(cdim_config* config, const char* text);
CDIM_API cdim_status cdim_config_from_output(const char* output_text, cdim_config** out);
CDIM_API cdim_status cdim_config_canonical(const cdim_config* config, char** out);
CDIM_API void cdim_config_free(cdim_config* config);

/* Executes a run. A probe that misses its threshold returns CDIM_PROBE and
   still fills *out. */
CDIM_API cdim_status cdim_run(const cdim_config* config, cdim_result** out);
CDIM_API const char* cdim_result_output(const cdim_result* result);
CDIM_API const char* cdim_result_summary(const cdim_result* result);
CDIM_API const char* cdim_result_svg(const cdim_result* result);
CDIM_API int cdim_result_exit_code(const cdim_result* result);
CDIM_API void cdim_result_free(cdim_result* result);

#ifdef __cplusplus
}
#endif

#endif
