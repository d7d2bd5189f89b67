#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace conjdim::app {

inline constexpr const char* kToolName = "conjdim";
const char* version();

enum class Command { Beta, Dim, Spectrum, Theta, Probe, Experiment };
enum class Format { Csv, Json };

/// Settings for one run. Keys mirror the command-line flags with '-' read as
/// '_'; unset optional values take per-command defaults when canonicalised.
struct RunConfig {
  Command command = Command::Dim;
  std::string subkind; // probe kind or experiment name
  std::string map_s;
  std::string map_t;
  std::optional<double> s_min, s_max;
  std::optional<int> s_steps;
  std::optional<int> points; // theta grid size
  std::optional<int> depth;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::optional<int> samples;
  Format format = Format::Csv;
  std::string source = "numeric";
  // probe options
  std::optional<double> s;
  std::optional<long> length;
  std::optional<double> c;
  std::optional<double> threshold;
  std::optional<int> n_scale;
  std::optional<long> pairs;
  std::optional<int> max_depth;
  // experiment options
  std::optional<double> tau;
  std::vector<double> taus;
  std::vector<int> windows;
  // not part of the canonical form: they do not change any output byte
  int threads = 1;
  std::string out;
  std::string svg;

  /// Sets one key from its text form; throws ConfigError on unknown keys or
  /// malformed values.
  void set(std::string_view key, std::string_view value);
  /// Reads `key = value` lines; `[section]` headers and `#`/`;` comments are skipped.
  void load_ini(std::string_view text);
  /// Validates and fills defaults; the result is what a run actually uses.
  RunConfig resolved() const;
  /// `key = value` lines of the resolved config, in a fixed key order.
  std::string canonical() const;
};

std::string to_string(Command c);
Command parse_command(std::string_view s);

/// Recovers the config embedded in a CSV header or JSON output.
RunConfig config_from_output(std::string_view text);

struct RunResult {
  std::string output;  // main file body, header included
  std::string summary; // JSON summary
  std::string svg;     // empty unless requested
  int exit_code = 0;   // 0, or 4 when a probe misses its frozen threshold
};

/// Runs a resolved or unresolved config. Errors propagate as exceptions.
RunResult run(const RunConfig& config);

/// Maps an exception to the process exit code: 2 config, 3 numerical, 4 probe, 1 other.
int exit_code_for(const std::exception& e);

} // namespace conjdim::app
