#include "conjdim/app.hpp"

#include "conjdim/coding.hpp"
#include "conjdim/empirics.hpp"
#include "conjdim/errors.hpp"
#include "conjdim/maps.hpp"
#include "conjdim/thermo.hpp"
#include "internal/numfmt.hpp"
#include "internal/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#ifndef CONJDIM_VERSION
#define CONJDIM_VERSION "0.0.0"
#endif

namespace conjdim::app {

using detail::g12;
using detail::round12;
using Json = nlohmann::ordered_json;

const char* version() { return CONJDIM_VERSION; }

namespace {

std::string tool_line() { return std::string(kToolName) + " " + version(); }

std::string key_of(std::string_view k) {
  std::string out(detail::trim(k));
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double x;
  if (!detail::parse_double(detail::trim(v), x) || !std::isfinite(x))
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  return x;
}

long long to_integer(std::string_view key, std::string_view v) {
  long long x;
  std::string_view t = detail::trim(v);
  if (detail::parse_int(t, x)) return x;
  // Accept integral values written in floating notation such as 1e5.
  double d;
  if (detail::parse_double(t, d) && std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15)
    return static_cast<long long>(d);
  throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
}

template <class T>
std::vector<T> to_list(std::string_view key, std::string_view v) {
  std::vector<T> out;
  std::size_t start = 0;
  const std::string text(detail::trim(v));
  if (text.empty()) return out;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find_first_of(",/", start), text.size());
    const std::string_view item(text.data() + start, end - start);
    if constexpr (std::is_same_v<T, double>) out.push_back(to_double(key, item));
    else out.push_back(static_cast<T>(to_integer(key, item)));
    start = end + 1;
  }
  return out;
}

std::string num(double x) { return detail::shortest(x); }

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>) out += num(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

std::string canonical_map(const std::string& text) { return maps::MapSpec::parse(text).to_string(); }

const std::vector<std::string> kProbeKinds{"oscillation", "singular", "blowup", "hoelder"};
const std::vector<std::string> kExperiments{"salem-sweep", "sine-sweep", "mollify"};

} // namespace

std::string to_string(Command c) {
  switch (c) {
  case Command::Beta: return "beta";
  case Command::Dim: return "dim";
  case Command::Spectrum: return "spectrum";
  case Command::Theta: return "theta";
  case Command::Probe: return "probe";
  case Command::Experiment: return "experiment";
  }
  return "?";
}

Command parse_command(std::string_view s) {
  for (Command c : {Command::Beta, Command::Dim, Command::Spectrum, Command::Theta, Command::Probe, Command::Experiment})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown command '" + std::string(s) + "'");
}

void RunConfig::set(std::string_view raw_key, std::string_view raw_value) {
  const std::string key = key_of(raw_key);
  const std::string value(detail::trim(raw_value));
  auto opt_double = [&](std::optional<double>& slot) { slot = to_double(key, value); };
  auto opt_int = [&](std::optional<int>& slot) { slot = static_cast<int>(to_integer(key, value)); };
  auto opt_long = [&](std::optional<long>& slot) { slot = static_cast<long>(to_integer(key, value)); };

  if (key == "command") command = parse_command(value);
  else if (key == "probe") {
    command = Command::Probe;
    subkind = value;
  } else if (key == "experiment") {
    command = Command::Experiment;
    subkind = value;
  } else if (key == "map_s") map_s = value;
  else if (key == "map_t") map_t = value;
  else if (key == "s_min") opt_double(s_min);
  else if (key == "s_max") opt_double(s_max);
  else if (key == "s_steps") opt_int(s_steps);
  else if (key == "points") opt_int(points);
  else if (key == "depth") opt_int(depth);
  else if (key == "tol") opt_double(tol);
  else if (key == "seed") {
    const long long v = to_integer(key, value);
    if (v < 0) throw ConfigError("seed must be non-negative");
    seed = static_cast<std::uint64_t>(v);
  } else if (key == "samples") opt_int(samples);
  else if (key == "format") {
    if (value == "csv") format = Format::Csv;
    else if (value == "json") format = Format::Json;
    else throw ConfigError("format must be csv or json, got '" + value + "'");
  } else if (key == "source") {
    if (value != "numeric" && value != "closed-form") throw ConfigError("source must be numeric or closed-form");
    source = value;
  } else if (key == "s") {
    if (value == "auto") s.reset();
    else opt_double(s);
  } else if (key == "length") opt_long(length);
  else if (key == "c") opt_double(c);
  else if (key == "threshold") opt_double(threshold);
  else if (key == "n_scale") opt_int(n_scale);
  else if (key == "pairs") opt_long(pairs);
  else if (key == "max_depth") opt_int(max_depth);
  else if (key == "tau") opt_double(tau);
  else if (key == "taus") taus = to_list<double>(key, value);
  else if (key == "windows") windows = to_list<int>(key, value);
  else if (key == "threads") threads = static_cast<int>(to_integer(key, value));
  else if (key == "out") out = value;
  else if (key == "svg") svg = value;
  else throw ConfigError("unknown configuration key '" + std::string(raw_key) + "'");
}

void RunConfig::load_ini(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';' || t.front() == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    set(t.substr(0, eq), t.substr(eq + 1));
  }
}

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  if (r.threads < 1) throw ConfigError("threads must be >= 1");
  if (r.command == Command::Probe &&
      std::find(kProbeKinds.begin(), kProbeKinds.end(), r.subkind) == kProbeKinds.end())
    throw ConfigError("probe kind must be one of oscillation, singular, blowup, hoelder; got '" + r.subkind + "'");
  if (r.command == Command::Experiment &&
      std::find(kExperiments.begin(), kExperiments.end(), r.subkind) == kExperiments.end())
    throw ConfigError("experiment must be one of salem-sweep, sine-sweep, mollify; got '" + r.subkind + "'");
  if (r.command != Command::Probe && r.command != Command::Experiment) r.subkind.clear();

  if (r.command == Command::Experiment) {
    r.map_s.clear();
    r.map_t.clear();
    if (r.subkind == "salem-sweep") {
      if (!r.depth) r.depth = 20;
      if (r.taus.empty())
        r.taus = {0.05, 0.08, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    } else if (r.subkind == "sine-sweep") {
      if (!r.depth) r.depth = 14;
      if (r.taus.empty()) r.taus = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    } else {
      if (!r.depth) r.depth = 14;
      if (!r.tau) r.tau = 0.08;
      if (r.windows.empty()) r.windows = {8, 16, 32, 64};
    }
    for (double t : r.taus)
      if (!(t > 0.0 && t < 1.0)) throw ConfigError("taus must lie in (0,1)");
    if (*r.depth < 1) throw ConfigError("depth must be >= 1");
    return r;
  }

  if (r.map_s.empty()) throw ConfigError("map_s is required (for example --map-s salem:tau=0.2)");
  r.map_s = canonical_map(r.map_s);
  if (r.map_t.empty()) r.map_t = "doubling:d=" + std::to_string(maps::build(maps::MapSpec::parse(r.map_s)).branches());
  r.map_t = canonical_map(r.map_t);
  if (!r.depth) r.depth = 14;
  if (*r.depth < 1) throw ConfigError("depth must be >= 1");
  if (!r.tol) r.tol = r.command == Command::Theta ? 1e-9 : 1e-13;
  if (!(*r.tol > 0.0)) throw ConfigError("tol must be positive");

  switch (r.command) {
  case Command::Beta:
    if (!r.s_min) r.s_min = -2.0;
    if (!r.s_max) r.s_max = 3.0;
    if (!r.s_steps) r.s_steps = 101;
    if (!(*r.s_max > *r.s_min)) throw ConfigError("s_max must exceed s_min");
    if (*r.s_steps < 2) throw ConfigError("s_steps must be >= 2");
    break;
  case Command::Dim:
  case Command::Spectrum:
    if (!r.s_steps) r.s_steps = 101;
    if (*r.s_steps < 2) throw ConfigError("s_steps must be >= 2");
    break;
  case Command::Theta:
    if (!r.points) r.points = 101;
    if (*r.points < 2) throw ConfigError("points must be >= 2");
    break;
  case Command::Probe:
    if (r.subkind == "oscillation") {
      if (!r.length) r.length = 100000;
      if (!r.samples) r.samples = 200;
      if (!r.c) r.c = 2.0;
      if (!r.threshold) r.threshold = 0.9;
    } else if (r.subkind == "singular") {
      if (!r.samples) r.samples = 500;
      if (!r.n_scale) r.n_scale = 25;
      if (!r.threshold) r.threshold = 1e-2;
    } else if (r.subkind == "blowup") {
      if (!r.s) r.s = 0.8;
      if (!r.length) r.length = 10000;
      if (!r.samples) r.samples = 200;
      if (!r.threshold) r.threshold = 1e3;
    } else {
      if (!r.pairs) r.pairs = 100000;
      if (!r.max_depth) r.max_depth = 30;
    }
    if (r.samples && *r.samples < 1) throw ConfigError("samples must be >= 1");
    if (r.length && *r.length < 1) throw ConfigError("length must be >= 1");
    break;
  case Command::Experiment: break;
  }
  if (r.source == "closed-form") {
    const auto ss = maps::MapSpec::parse(r.map_s);
    if (ss.family != maps::Family::Salem || r.map_t != "doubling:d=2")
      throw ConfigError("closed-form source needs map_s salem:tau=... and map_t doubling:d=2");
  }
  return r;
}

std::string RunConfig::canonical() const {
  const RunConfig r = resolved();
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", to_string(r.command));
  if (r.command == Command::Probe) kv.emplace_back("probe", r.subkind);
  if (r.command == Command::Experiment) kv.emplace_back("experiment", r.subkind);
  auto put = [&](const char* k, const auto& v) {
    using V = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<V, std::optional<double>>) {
      if (v) kv.emplace_back(k, num(*v));
    } else if constexpr (std::is_same_v<V, std::optional<int>> || std::is_same_v<V, std::optional<long>>) {
      if (v) kv.emplace_back(k, std::to_string(*v));
    } else {
      kv.emplace_back(k, v);
    }
  };
  if (r.command != Command::Experiment) {
    put("map_s", r.map_s);
    put("map_t", r.map_t);
    if (r.command != Command::Theta) put("source", r.source);
  }
  if (r.command != Command::Theta) put("depth", r.depth);
  if (r.command != Command::Experiment) put("tol", r.tol);
  put("s_min", r.s_min);
  put("s_max", r.s_max);
  put("s_steps", r.s_steps);
  put("points", r.points);
  if (r.command == Command::Probe) {
    kv.emplace_back("seed", std::to_string(r.seed));
    put("samples", r.samples);
    if (r.subkind == "oscillation" || r.subkind == "hoelder") kv.emplace_back("s", r.s ? num(*r.s) : "auto");
    else put("s", r.s);
    put("length", r.length);
    put("c", r.c);
    put("threshold", r.threshold);
    put("n_scale", r.n_scale);
    put("pairs", r.pairs);
    put("max_depth", r.max_depth);
  }
  if (r.command == Command::Experiment) {
    put("tau", r.tau);
    if (!r.taus.empty()) kv.emplace_back("taus", join(r.taus));
    if (!r.windows.empty()) kv.emplace_back("windows", join(r.windows));
  }
  kv.emplace_back("format", r.format == Format::Csv ? "csv" : "json");
  std::string outtext;
  for (const auto& [k, v] : kv) outtext += k + " = " + v + "\n";
  return outtext;
}

RunConfig config_from_output(std::string_view text) {
  RunConfig cfg;
  const std::string_view t = detail::trim(text);
  if (!t.empty() && t.front() == '{') {
    Json j;
    try {
      j = Json::parse(t);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("replay: output is not valid JSON: ") + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("replay: JSON output has no config");
    for (const auto& [k, v] : j["config"].items()) cfg.set(k, v.get<std::string>());
    return cfg;
  }
  std::istringstream in{std::string(text)};
  std::string line;
  bool any = false;
  while (std::getline(in, line) && line.rfind("#", 0) == 0) {
    const std::string_view body = detail::trim(std::string_view(line).substr(1));
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) continue; // tool version line
    cfg.set(body.substr(0, eq), body.substr(eq + 1));
    any = true;
  }
  if (!any) throw ConfigError("replay: no configuration header found");
  return cfg;
}

// ---------------------------------------------------------------------------

namespace {

struct Curve {
  std::string name;
  std::vector<double> x, y;
};

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::vector<Curve>& curves) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.y[i])) continue;
      x0 = std::min(x0, c.x[i]);
      x1 = std::max(x1, c.x[i]);
      y0 = std::min(y0, c.y[i]);
      y1 = std::max(y1, c.y[i]);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  constexpr double W = 640, H = 400, M = 48;
  const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect x=\"" + g12(M) + "\" y=\"" + g12(M / 2) + "\" width=\"" + g12(W - 1.5 * M) + "\" height=\"" +
       g12(H - 1.5 * M) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  s += "<text x=\"" + g12(W / 2) + "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">" + title + "</text>\n";
  s += "<text x=\"" + g12(W / 2) + "\" y=\"" + g12(H - 6) + "\" text-anchor=\"middle\" font-size=\"12\">" + xlabel +
       " in [" + g12(x0) + ", " + g12(x1) + "]; y in [" + g12(y0) + ", " + g12(y1) + "]</text>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    std::string pts;
    for (std::size_t i = 0; i < curves[k].x.size(); ++i) {
      if (!std::isfinite(curves[k].y[i])) continue;
      const double px = M + (curves[k].x[i] - x0) / (x1 - x0) * (W - 1.5 * M);
      const double py = H - M + (y0 - curves[k].y[i]) / (y1 - y0) * (H - 1.5 * M);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px, py);
      pts += buf;
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colours[k % 4]) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"><title>" + curves[k].name + "</title></polyline>\n";
  }
  return s + "</svg>\n";
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
  std::vector<std::string> notes; // optional trailing text column
};

std::string csv_header(const RunConfig& r) {
  std::string h = "# " + tool_line() + "\n";
  std::istringstream in(r.canonical());
  std::string line;
  while (std::getline(in, line)) h += "# " + line + "\n";
  return h;
}

Json config_json(const RunConfig& r) {
  Json c = Json::object();
  std::istringstream in(r.canonical());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    c[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return c;
}

Json envelope(const RunConfig& r) {
  Json j;
  j["tool_version"] = tool_line();
  j["config"] = config_json(r);
  return j;
}

Json jnum(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return Json(nullptr);
  return Json(round12(*v));
}

std::string render(const RunConfig& r, const Table& t, const Json& summary) {
  if (r.format == Format::Csv) {
    std::string s = csv_header(r);
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      for (std::size_t i = 0; i < t.rows[k].size(); ++i) {
        if (i) s += ",";
        if (t.rows[k][i] && std::isfinite(*t.rows[k][i])) s += g12(*t.rows[k][i]);
      }
      if (!t.notes.empty()) s += "," + t.notes[k];
      s += "\n";
    }
    return s;
  }
  Json j = envelope(r);
  Json rows = Json::array();
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    Json row;
    for (std::size_t i = 0; i < t.rows[k].size(); ++i) row[t.columns[i]] = jnum(t.rows[k][i]);
    if (!t.notes.empty()) row[t.columns.back()] = t.notes[k];
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["summary"] = summary;
  return j.dump(2) + "\n";
}

std::string summary_text(const RunConfig& r, const Json& summary) {
  Json j = envelope(r);
  j["summary"] = summary;
  return j.dump(2) + "\n";
}

thermo::BetaProfile make_profile(const RunConfig& r) {
  if (r.source == "closed-form") return thermo::BetaProfile::salem_closed_form(maps::MapSpec::parse(r.map_s).tau);
  auto pair = std::make_shared<const thermo::PotentialPair>(maps::make_map(r.map_s), maps::make_map(r.map_t));
  thermo::SolverSettings ss;
  ss.depth = *r.depth;
  ss.tol = *r.tol;
  return thermo::BetaProfile::numeric(pair, ss);
}

double beta_slope(const thermo::BetaProfile& p, double s) {
  return p.bernoulli() ? thermo::beta_prime_gibbs(p, s) : thermo::beta_prime(p, s).value;
}

RunResult cmd_beta(const RunConfig& r) {
  const auto profile = make_profile(r);
  const int n = *r.s_steps;
  Table t{{"s", "beta", "beta_prime"}, {}, {}};
  t.rows.resize(static_cast<std::size_t>(n));
  detail::parallel_for(t.rows.size(), r.threads, [&](std::size_t k) {
    const double s = k + 1 == t.rows.size() ? *r.s_max : *r.s_min + (*r.s_max - *r.s_min) * k / (n - 1);
    t.rows[k] = {s, profile(s), beta_slope(profile, s)};
  });
  std::size_t best = 0;
  for (std::size_t k = 0; k < t.rows.size(); ++k)
    if (*t.rows[k][0] + *t.rows[k][1] < *t.rows[best][0] + *t.rows[best][1]) best = k;
  Json sm;
  sm["beta_at_0"] = round12(profile(0.0));
  sm["beta_at_1"] = round12(profile(1.0));
  sm["grid_min_beta_tilde"] = round12(*t.rows[best][0] + *t.rows[best][1]);
  sm["grid_argmin_s"] = round12(*t.rows[best][0]);
  sm["source"] = profile.source_name();
  RunResult out{render(r, t, sm), summary_text(r, sm), {}, 0};
  if (!r.svg.empty()) {
    Curve c{"beta", {}, {}};
    for (const auto& row : t.rows) {
      c.x.push_back(*row[0]);
      c.y.push_back(*row[1]);
    }
    out.svg = svg_plot("beta(s)", "s", {c});
  }
  return out;
}

RunResult cmd_dim(const RunConfig& r) {
  const auto profile = make_profile(r);
  thermo::ThermoSettings ts;
  ts.solver = profile.settings();
  ts.spectrum_steps = *r.s_steps;
  ts.threads = r.threads;
  const auto rep = thermo::analyze(profile, ts);
  Json report = Json::parse(thermo::report_json(rep));
  RunResult out;
  if (r.format == Format::Json) {
    Json j = envelope(r);
    for (auto& [k, v] : report.items()) j[k] = v;
    out.output = j.dump(2) + "\n";
  } else {
    std::string s = csv_header(r) + "key,value\n";
    s += "verdict," + thermo::to_string(rep.verdict) + "\n";
    s += "dim_nondiff," + g12(rep.dim_nondiff) + "\n";
    s += "s0," + (rep.s0 ? g12(*rep.s0) : "") + "\n";
    s += "beta_s0," + (rep.beta_s0 ? g12(*rep.beta_s0) : "") + "\n";
    s += "hoelder_exponent," + g12(rep.hoelder_exponent) + "\n";
    s += "derivative_range_lo," + g12(rep.derivative_range.lo) + "\n";
    s += "derivative_range_hi," + g12(rep.derivative_range.hi) + "\n";
    s += "dependence_deviation," + g12(rep.dependence_deviation) + "\n";
    s += "pressure_residual," + g12(rep.pressure_residual) + "\n";
    s += "bracket_lower," + g12(rep.bracket_lower) + "\n";
    s += "bracket_upper," + g12(rep.bracket_upper) + "\n";
    out.output = s;
  }
  report.erase("spectrum");
  out.summary = summary_text(r, report);
  if (!r.svg.empty()) {
    Curve c{"dim L(s)", {}, {}};
    for (const auto& p : rep.spectrum) {
      c.x.push_back(p.s);
      c.y.push_back(p.dim.value_or(NAN));
    }
    out.svg = svg_plot("Lyapunov spectrum", "s", {c});
  }
  return out;
}

RunResult cmd_spectrum(const RunConfig& r) {
  const auto profile = make_profile(r);
  const auto dep = thermo::dependence_test(profile);
  std::vector<thermo::SpectrumPoint> pts;
  if (dep.verdict == thermo::Verdict::Dependent) pts = {thermo::SpectrumPoint{1.0, 1.0}};
  else pts = thermo::lyapunov_spectrum(profile, thermo::spectrum_grid(profile, *r.s_steps), r.threads);
  Table t{{"s", "dim"}, {}, {}};
  double peak = -INFINITY, s_peak = NAN;
  std::optional<double> at_one;
  for (const auto& p : pts) {
    t.rows.push_back({p.s, p.dim});
    if (p.dim && *p.dim > peak) {
      peak = *p.dim;
      s_peak = p.s;
    }
    if (p.s == 1.0) at_one = p.dim;
  }
  Json sm;
  sm["verdict"] = thermo::to_string(dep.verdict);
  sm["peak"] = round12(peak);
  sm["peak_s"] = round12(s_peak);
  sm["value_at_1"] = jnum(at_one);
  RunResult out{render(r, t, sm), summary_text(r, sm), {}, 0};
  if (!r.svg.empty()) {
    Curve c{"dim L(s)", {}, {}};
    for (const auto& p : pts) {
      c.x.push_back(p.s);
      c.y.push_back(p.dim.value_or(NAN));
    }
    out.svg = svg_plot("Lyapunov spectrum", "s", {c});
  }
  return out;
}

RunResult cmd_theta(const RunConfig& r) {
  const auto s = maps::make_map(r.map_s), t = maps::make_map(r.map_t);
  if (s->branches() != t->branches()) throw ConfigError("maps have different numbers of branches");
  const int n = *r.points;
  std::vector<coding::ThetaRow> rows(static_cast<std::size_t>(n));
  detail::parallel_for(rows.size(), r.threads, [&](std::size_t k) {
    const double xi = k + 1 == rows.size() ? 1.0 : static_cast<double>(k) / (n - 1);
    rows[k] = {xi, coding::theta(*s, *t, xi, *r.tol)};
  });
  Table tab{{"xi", "theta", "err"}, {}, {}};
  double max_err = 0.0;
  for (const auto& row : rows) {
    tab.rows.push_back({row.xi, row.theta.value, row.theta.error_bound});
    max_err = std::max(max_err, row.theta.error_bound);
  }
  Json sm;
  sm["points"] = n;
  sm["max_error_bound"] = round12(max_err);
  RunResult out{render(r, tab, sm), summary_text(r, sm), {}, 0};
  if (!r.svg.empty()) {
    Curve c{"Theta", {}, {}};
    for (const auto& row : rows) {
      c.x.push_back(row.xi);
      c.y.push_back(row.theta.value);
    }
    out.svg = svg_plot("conjugacy Theta", "xi", {c});
  }
  return out;
}

RunResult cmd_probe(const RunConfig& r) {
  const auto profile = make_profile(r);
  empirics::ProbeSettings ps{r.seed, r.threads};
  Json sm;
  sm["probe"] = r.subkind;
  Table t;
  bool pass = true;
  if (r.subkind == "oscillation") {
    const double s = r.s ? *r.s : thermo::find_s0(profile);
    const auto res = empirics::oscillation_check(profile, s, *r.length, *r.samples, *r.c, ps);
    t.columns = {"sample", "max", "min", "first_above", "first_below", "late_above"};
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
      const auto& st = res.samples[i];
      t.rows.push_back({double(i), st.max, st.min, double(st.first_above), double(st.first_below), double(st.late_above)});
    }
    pass = res.fraction >= *r.threshold;
    sm["s"] = round12(s);
    sm["mean_chi"] = round12(res.mean_chi);
    sm["fraction"] = round12(res.fraction);
    sm["upper_fraction"] = round12(res.upper_fraction);
    sm["lower_fraction"] = round12(res.lower_fraction);
    sm["late_upper_fraction"] = round12(res.late_upper_fraction);
    sm["threshold"] = round12(*r.threshold);
  } else if (r.subkind == "singular") {
    const auto res = empirics::lebesgue_zero_check(*profile.pair(), *r.samples, *r.n_scale, ps);
    t.columns = {"sample", "level", "log_quotient"};
    for (std::size_t i = 0; i < res.log_quotients.size(); ++i)
      for (std::size_t k = 0; k < res.levels.size(); ++k)
        t.rows.push_back({double(i), double(res.levels[k].level), res.log_quotients[i][k]});
    Json lv = Json::array();
    for (const auto& l : res.levels)
      lv.push_back({{"level", l.level}, {"median", round12(l.median)}, {"below_1e-2", round12(l.below_1e_2)},
                    {"below_1e-4", round12(l.below_1e_4)}});
    sm["levels"] = lv;
    sm["median_final"] = round12(res.median_final);
    sm["fitted_rate"] = round12(res.fitted_rate);
    sm["expected_rate"] = res.expected_rate > 0.0 ? Json(round12(res.expected_rate)) : Json(nullptr);
    sm["threshold"] = round12(*r.threshold);
    pass = res.median_final < *r.threshold &&
           (res.expected_rate <= 0.0 || std::abs(res.fitted_rate / res.expected_rate - 1.0) < 0.2);
  } else if (r.subkind == "blowup") {
    const auto res = empirics::blowup_probe(profile, *r.s, *r.samples, *r.length, *r.threshold, ps);
    t.columns = {"sample", "log_quotient"};
    for (std::size_t i = 0; i < res.log_quotients.size(); ++i) t.rows.push_back({double(i), res.log_quotients[i]});
    sm["s"] = round12(res.s);
    sm["mean_chi"] = round12(res.mean_chi);
    sm["fraction"] = round12(res.fraction);
    sm["decaying"] = round12(res.decaying);
    sm["threshold"] = round12(res.threshold);
    pass = res.fraction >= 0.95;
  } else {
    const double alpha = thermo::hoelder_exponent(profile).exponent;
    const double s = r.s ? *r.s : alpha - 0.02;
    const auto res = empirics::s_holder_probe(*profile.pair(), s, *r.pairs, *r.max_depth, ps);
    t.columns = {"depth", "max_log_ratio"};
    for (const auto& [d, v] : res.max_log_ratio) t.rows.push_back({double(d), v});
    const bool bounded_expected = s < alpha;
    pass = bounded_expected ? res.violations == 0 : res.growth > 10.0;
    sm["s"] = round12(s);
    sm["hoelder_exponent"] = round12(alpha);
    sm["fitted_log_bound"] = round12(res.fitted_log_bound);
    sm["violations"] = res.violations;
    sm["growth"] = round12(res.growth);
    sm["expected"] = bounded_expected ? "bounded" : "unbounded";
  }
  sm["pass"] = pass;
  RunResult out{render(r, t, sm), summary_text(r, sm), {}, pass ? 0 : 4};
  if (!r.svg.empty() && !t.rows.empty()) {
    Curve c{t.columns.back(), {}, {}};
    for (const auto& row : t.rows) {
      c.x.push_back(*row.front());
      c.y.push_back(row.back().value_or(NAN));
    }
    out.svg = svg_plot("probe " + r.subkind, t.columns.front(), {c});
  }
  return out;
}

RunResult cmd_experiment(const RunConfig& r) {
  Table t;
  Json sm;
  sm["experiment"] = r.subkind;
  std::vector<Curve> curves;
  if (r.subkind == "salem-sweep") {
    const auto rows = empirics::salem_sweep(r.taus, *r.depth, r.threads);
    t.columns = {"tau", "dim_numeric", "dim_closed", "dim_variational", "p", "s0"};
    Curve a{"numeric", {}, {}}, b{"closed form", {}, {}};
    double worst = 0.0;
    for (const auto& x : rows) {
      t.rows.push_back({x.tau, x.dim_numeric, x.dim_closed, x.dim_variational, x.p, x.s0});
      a.x.push_back(x.tau);
      a.y.push_back(x.dim_numeric);
      b.x.push_back(x.tau);
      b.y.push_back(x.dim_closed);
      worst = std::max({worst, std::abs(x.dim_numeric - x.dim_closed), std::abs(x.dim_variational - x.dim_closed)});
    }
    sm["max_route_disagreement"] = round12(worst);
    curves = {a, b};
  } else if (r.subkind == "sine-sweep") {
    const auto tab = empirics::smooth_dependence_sweep(r.taus, *r.depth, r.threads);
    t.columns = {"tau", "dim", "s0", "second_difference", "error"};
    Curve a{"sine dim", {}, {}};
    bool in_unit = true;
    for (const auto& x : tab.rows) {
      const bool ok = x.error.empty();
      t.rows.push_back({x.tau, ok ? std::optional(x.dim) : std::nullopt, ok ? std::optional(x.s0) : std::nullopt,
                        x.second_difference});
      t.notes.push_back(x.error.empty() ? "" : "\"" + x.error + "\"");
      a.x.push_back(x.tau);
      a.y.push_back(ok ? x.dim : NAN);
      in_unit = in_unit && ok && x.dim > 0.0 && x.dim < 1.0;
    }
    sm["max_second_difference"] = round12(tab.max_second_difference);
    sm["all_in_unit_interval"] = in_unit;
    curves = {a};
  } else {
    const auto tab = empirics::mollify_convergence(*r.tau, r.windows, *r.depth, r.threads);
    t.columns = {"n", "dim", "s0", "bracket_width", "closed_form", "error"};
    Curve a{"mollified dim", {}, {}};
    for (const auto& x : tab.rows) {
      const bool ok = x.error.empty();
      t.rows.push_back({double(x.windows), ok ? std::optional(x.dim) : std::nullopt,
                        ok ? std::optional(x.s0) : std::nullopt, ok ? std::optional(x.bracket_width) : std::nullopt,
                        tab.closed_form});
      t.notes.push_back(x.error.empty() ? "" : "\"" + x.error + "\"");
      a.x.push_back(x.windows);
      a.y.push_back(ok ? x.dim : NAN);
    }
    sm["closed_form"] = round12(tab.closed_form);
    if (!tab.rows.empty() && tab.rows.back().error.empty())
      sm["final_gap"] = round12(std::abs(tab.rows.back().dim - tab.closed_form));
    curves = {a};
  }
  RunResult out{render(r, t, sm), summary_text(r, sm), {}, 0};
  if (!r.svg.empty()) out.svg = svg_plot("experiment " + r.subkind, r.subkind == "mollify" ? "n" : "tau", curves);
  return out;
}

} // namespace

RunResult run(const RunConfig& config) {
  const RunConfig r = config.resolved();
  switch (r.command) {
  case Command::Beta: return cmd_beta(r);
  case Command::Dim: return cmd_dim(r);
  case Command::Spectrum: return cmd_spectrum(r);
  case Command::Theta: return cmd_theta(r);
  case Command::Probe: return cmd_probe(r);
  case Command::Experiment: return cmd_experiment(r);
  }
  throw ConfigError("unknown command");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 3;
  if (dynamic_cast<const DependenceSignal*>(&e)) return 3;
  if (dynamic_cast<const ProbeFailure*>(&e)) return 4;
  return 1;
}

} // namespace conjdim::app
