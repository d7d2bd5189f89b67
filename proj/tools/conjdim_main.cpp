#include "conjdim/conjdim.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

// Flags shared by every subcommand; only the ones given on the command line
// are forwarded, so config-file values survive.
struct Flags {
  std::vector<std::pair<std::string, std::string>> given;
  std::string config_file;
  std::string out;
  std::string svg;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { given.emplace_back(key, v); }, help);
  }
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_file, "INI file with key = value settings");
  app->add_option("--out", f.out, "output file (default: stdout)");
  app->add_option("--svg", f.svg, "write an SVG plot to this path");
  f.add(app, "--format", "format", "csv or json");
  f.add(app, "--threads", "threads", "worker threads");
}

void add_maps(CLI::App* app, Flags& f) {
  f.add(app, "--map-s", "map_s", "map S, e.g. salem:tau=0.2");
  f.add(app, "--map-t", "map_t", "map T (default doubling with the branch count of S)");
  f.add(app, "--depth", "depth", "cylinder depth");
  f.add(app, "--tol", "tol", "solver tolerance");
  f.add(app, "--source", "source", "numeric or closed-form");
}

int finish(const Flags& f, cdim_result* res, int code) {
  const std::string output = cdim_result_output(res);
  const std::string summary = cdim_result_summary(res);
  if (f.out.empty()) {
    std::cout << output;
    std::cerr << summary;
  } else {
    if (!write_file(f.out, output) || !write_file(f.out + ".summary.json", summary)) {
      std::cerr << "error: cannot write " << f.out << "\n";
      return 1;
    }
  }
  if (!f.svg.empty() && !write_file(f.svg, cdim_result_svg(res))) {
    std::cerr << "error: cannot write " << f.svg << "\n";
    return 1;
  }
  return code;
}

int execute(cdim_config* cfg, const Flags& f) {
  cdim_result* res = nullptr;
  const cdim_status st = cdim_run(cfg, &res);
  if (!res) {
    std::cerr << "error: " << cdim_last_error() << "\n";
    return static_cast<int>(st);
  }
  if (st == CDIM_PROBE) std::cerr << "probe: " << cdim_last_error() << "\n";
  const int code = finish(f, res, static_cast<int>(st));
  cdim_result_free(res);
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension of the measure of maximal dissonance for conjugate expanding circle maps", "conjdim"};
  app.set_version_flag("--version", std::string("conjdim ") + cdim_version());
  app.require_subcommand(1);

  Flags f;
  std::string command, subkind, replay_path;

  auto* beta = app.add_subcommand("beta", "beta(s) on a grid");
  add_common(beta, f);
  add_maps(beta, f);
  f.add(beta, "--s-min", "s_min", "first s");
  f.add(beta, "--s-max", "s_max", "last s");
  f.add(beta, "--s-steps", "s_steps", "number of grid points");

  auto* dim = app.add_subcommand("dim", "dimension report");
  add_common(dim, f);
  add_maps(dim, f);
  f.add(dim, "--s-steps", "s_steps", "spectrum grid points");

  auto* spectrum = app.add_subcommand("spectrum", "Lyapunov spectrum");
  add_common(spectrum, f);
  add_maps(spectrum, f);
  f.add(spectrum, "--s-steps", "s_steps", "grid points");

  auto* theta = app.add_subcommand("theta", "conjugacy on a uniform grid");
  add_common(theta, f);
  add_maps(theta, f);
  f.add(theta, "--points", "points", "grid points");

  auto* probe = app.add_subcommand("probe", "randomised checks");
  probe->add_option("kind", subkind, "oscillation, singular, blowup or hoelder")->required();
  add_common(probe, f);
  add_maps(probe, f);
  f.add(probe, "--seed", "seed", "base seed");
  f.add(probe, "--samples", "samples", "number of samples");
  f.add(probe, "--s", "s", "parameter s (oscillation/hoelder default: auto)");
  f.add(probe, "--length", "length", "trajectory length");
  f.add(probe, "-c", "c", "oscillation level");
  f.add(probe, "--threshold", "threshold", "pass threshold");
  f.add(probe, "--n-scale", "n_scale", "deepest level of the singularity check");
  f.add(probe, "--pairs", "pairs", "number of point pairs");
  f.add(probe, "--max-depth", "max_depth", "deepest cylinder level");

  auto* experiment = app.add_subcommand("experiment", "parameter sweeps");
  experiment->add_option("name", subkind, "salem-sweep, sine-sweep or mollify")->required();
  add_common(experiment, f);
  f.add(experiment, "--depth", "depth", "cylinder depth");
  f.add(experiment, "--tau", "tau", "tau for mollify");
  f.add(experiment, "--taus", "taus", "comma separated tau grid");
  f.add(experiment, "--windows", "windows", "comma separated window counts");

  auto* replay = app.add_subcommand("replay", "rerun the config embedded in an output file");
  replay->add_option("file", replay_path, "CSV or JSON output")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", f.out, "output file (default: stdout)");
  replay->add_option("--svg", f.svg, "write an SVG plot to this path");
  f.add(replay, "--threads", "threads", "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cdim_config* cfg = nullptr;
  auto check = [&](cdim_status st) {
    if (st != CDIM_OK) {
      std::cerr << "error: " << cdim_last_error() << "\n";
      cdim_config_free(cfg);
      std::exit(static_cast<int>(st));
    }
  };

  try {
    if (replay->parsed()) {
      check(cdim_config_from_output(read_file(replay_path).c_str(), &cfg));
    } else {
      check(cdim_config_new(&cfg));
      if (!f.config_file.empty()) check(cdim_config_load_text(cfg, read_file(f.config_file).c_str()));
      CLI::App* sub = app.get_subcommands().front();
      if (sub == probe || sub == experiment) {
        check(cdim_config_set(cfg, sub->get_name().c_str(), subkind.c_str()));
      } else {
        check(cdim_config_set(cfg, "command", sub->get_name().c_str()));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    cdim_config_free(cfg);
    return 2;
  }
  for (const auto& [k, v] : f.given) check(cdim_config_set(cfg, k.c_str(), v.c_str()));
  if (!f.out.empty()) check(cdim_config_set(cfg, "out", f.out.c_str()));
  if (!f.svg.empty()) check(cdim_config_set(cfg, "svg", f.svg.c_str()));

  const int code = execute(cfg, f);
  cdim_config_free(cfg);
  return code;
}
