#include <doctest.h>

#include "conjdim/conjdim.h"

#include <json.hpp>

#include <cmath>
#include <string>

TEST_CASE("C API: pair, profile and scalar queries") {
  cdim_pair* pair = nullptr;
  REQUIRE(cdim_pair_new("salem:tau=0.08", "doubling:d=2", &pair) == CDIM_OK);
  cdim_profile* profile = nullptr;
  REQUIRE(cdim_profile_new(pair, 20, 0.0, &profile) == CDIM_OK);

  double v = NAN;
  CHECK(cdim_beta(profile, 0.0, &v) == CDIM_OK);
  CHECK(std::abs(v - 1.0) < 1e-12);
  CHECK(cdim_dim(profile, &v) == CDIM_OK);
  CHECK(v == doctest::Approx(0.8107).epsilon(1e-3));
  double s0 = NAN, slope = NAN;
  CHECK(cdim_s0(profile, &s0) == CDIM_OK);
  CHECK(cdim_beta_prime(profile, s0, &slope) == CDIM_OK);
  CHECK(std::abs(slope + 1.0) < 1e-8);
  CHECK(cdim_hoelder(profile, &v) == CDIM_OK);
  CHECK(v == doctest::Approx(std::log(2.0) / std::log(1.0 / 0.08)));

  double lo, hi, est;
  CHECK(cdim_pressure(pair, 1.0, 0.0, 8, &lo, &hi, &est) == CDIM_OK);
  CHECK(std::abs(est) < 1e-12);

  double th, err;
  CHECK(cdim_theta(pair, 0.08, 1e-10, &th, &err) == CDIM_OK);
  CHECK(th == doctest::Approx(0.5));

  char* json = nullptr;
  REQUIRE(cdim_report_json(profile, 1, &json) == CDIM_OK);
  const auto j = nlohmann::json::parse(json);
  CHECK(j["verdict"] == "independent");
  CHECK(j["dim_nondiff"].get<double>() == doctest::Approx(0.8107).epsilon(1e-3));
  cdim_string_free(json);

  cdim_profile_free(profile);
  cdim_pair_free(pair);
}

TEST_CASE("C API: errors carry status codes and messages") {
  cdim_pair* pair = nullptr;
  CHECK(cdim_pair_new("salem:tau=2", "doubling:d=2", &pair) == CDIM_CONFIG);
  CHECK(pair == nullptr);
  CHECK(std::string(cdim_last_error()).find("tau") != std::string::npos);
  CHECK(cdim_pair_new("salem:tau=0.2", "doubling:d=3", &pair) == CDIM_CONFIG);
  CHECK(cdim_pair_new(nullptr, "doubling:d=2", &pair) == CDIM_CONFIG);

  REQUIRE(cdim_pair_new("doubling:d=2", "doubling:d=2", &pair) == CDIM_OK);
  cdim_profile* profile = nullptr;
  REQUIRE(cdim_profile_new(pair, 0, 0.0, &profile) == CDIM_OK);
  double v = NAN;
  CHECK(cdim_s0(profile, &v) == CDIM_CONVERGENCE);
  CHECK(cdim_dim(profile, &v) == CDIM_OK);
  CHECK(v == 0.0);
  cdim_profile_free(profile);
  cdim_pair_free(pair);
  CHECK(std::string(cdim_version()).size() > 0);
}

TEST_CASE("C API: config round trip and runs") {
  cdim_config* cfg = nullptr;
  REQUIRE(cdim_config_new(&cfg) == CDIM_OK);
  CHECK(cdim_config_set(cfg, "command", "beta") == CDIM_OK);
  CHECK(cdim_config_load_text(cfg, "[run]\nmap-s = salem:tau=0.2\n; comment\ns_steps = 3\n") == CDIM_OK);
  CHECK(cdim_config_set(cfg, "bogus", "1") == CDIM_CONFIG);
  CHECK(cdim_config_set(cfg, "depth", "x") == CDIM_CONFIG);

  char* canon = nullptr;
  REQUIRE(cdim_config_canonical(cfg, &canon) == CDIM_OK);
  CHECK(std::string(canon).find("map_t = doubling:d=2\n") != std::string::npos);
  cdim_string_free(canon);

  cdim_result* res = nullptr;
  REQUIRE(cdim_run(cfg, &res) == CDIM_OK);
  const std::string out = cdim_result_output(res);
  CHECK(out.rfind("# conjdim ", 0) == 0);
  CHECK(out.find("s,beta,beta_prime\n-2,") != std::string::npos);

  cdim_config* back = nullptr;
  REQUIRE(cdim_config_from_output(out.c_str(), &back) == CDIM_OK);
  cdim_result* res2 = nullptr;
  REQUIRE(cdim_run(back, &res2) == CDIM_OK);
  CHECK(out == cdim_result_output(res2));
  cdim_result_free(res2);
  cdim_config_free(back);
  cdim_result_free(res);
  cdim_config_free(cfg);
}

TEST_CASE("C API: a missed probe threshold still returns the result") {
  cdim_config* cfg = nullptr;
  REQUIRE(cdim_config_new(&cfg) == CDIM_OK);
  CHECK(cdim_config_set(cfg, "probe", "blowup") == CDIM_OK);
  CHECK(cdim_config_set(cfg, "map_s", "salem:tau=0.2") == CDIM_OK);
  CHECK(cdim_config_set(cfg, "samples", "20") == CDIM_OK);
  CHECK(cdim_config_set(cfg, "length", "2000") == CDIM_OK);
  cdim_result* res = nullptr;
  CHECK(cdim_run(cfg, &res) == CDIM_PROBE);
  REQUIRE(res != nullptr);
  CHECK(cdim_result_exit_code(res) == 4);
  CHECK(std::string(cdim_result_summary(res)).find("\"pass\": false") != std::string::npos);
  cdim_result_free(res);

  CHECK(cdim_config_set(cfg, "s", "0.2") == CDIM_OK);
  CHECK(cdim_run(cfg, &res) == CDIM_OK);
  CHECK(cdim_result_exit_code(res) == 0);
  cdim_result_free(res);
  cdim_config_free(cfg);
}
