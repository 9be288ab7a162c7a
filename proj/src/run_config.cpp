#include "gaugeflow/run_config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "gaugeflow/error.hpp"
#include "gaugeflow/field_io.hpp"

namespace gaugeflow {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw Error("config: cannot parse '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw Error("config: cannot parse '" + text + "' as a boolean for " + key);
}

std::vector<int> parse_list(const std::string& key, std::string text) {
  text = trim(text);
  if (!text.empty() && text.front() == '[') text.erase(0, 1);
  if (!text.empty() && text.back() == ']') text.pop_back();
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, item));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Entry {
  const char* key;
  const char* help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define GF_INT(member, key, help)                                                              \
  Entry {                                                                                      \
    key, help, [](RunConfig& c, const std::string& v) { c.member = parse_number<int>(key, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                            \
  }
#define GF_U64(member, key, help)                                                                        \
  Entry {                                                                                                \
    key, help, [](RunConfig& c, const std::string& v) { c.member = parse_number<std::uint64_t>(key, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                                      \
  }
#define GF_DOUBLE(member, key, help)                                                              \
  Entry {                                                                                         \
    key, help, [](RunConfig& c, const std::string& v) { c.member = parse_number<double>(key, v); }, \
        [](const RunConfig& c) { return format_double(c.member); }                                \
  }
#define GF_STRING(member, key, help)                                                \
  Entry {                                                                           \
    key, help, [](RunConfig& c, const std::string& v) { c.member = trim(v); },      \
        [](const RunConfig& c) { return c.member; }                                 \
  }
#define GF_LIST(member, key, help)                                                      \
  Entry {                                                                               \
    key, help, [](RunConfig& c, const std::string& v) { c.member = parse_list(key, v); }, \
        [](const RunConfig& c) { return format_list(c.member); }                        \
  }
#define GF_BOOL(member, key, help)                                                      \
  Entry {                                                                               \
    key, help, [](RunConfig& c, const std::string& v) { c.member = parse_bool(key, v); }, \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }     \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      GF_INT(n, "grid.n", "spatial dimension, 2..4"),
      GF_INT(m, "grid.m", "target dimension (maps into S^{m-1}, m x m connections)"),
      GF_INT(res, "grid.res", "points per axis, even, >= 8"),
      GF_STRING(kind, "map.kind", "constant | geodesic | perturbed | heatflow | synthetic_omega"),
      GF_STRING(base, "map.base", "base of perturbed/heatflow maps: constant | geodesic"),
      GF_LIST(wave, "map.wave", "geodesic wave vector, n integers"),
      GF_LIST(axes, "map.axes", "geodesic amplitude axes i,j (0-based)"),
      GF_DOUBLE(delta, "map.delta", "perturbation amplitude, 0..0.2"),
      GF_U64(seed, "map.seed", "seed of every random choice"),
      GF_INT(band, "map.band", "band limit |kappa|_inf of random data"),
      GF_DOUBLE(flow_time, "map.flow_time", "heat-flow physical time"),
      GF_DOUBLE(tau_factor, "map.tau_factor", "heat-flow step as a multiple of h^2, <= 0.25"),
      GF_DOUBLE(epsilon, "omega.epsilon", "synthetic ||Omega||_{L^{n,2}}, otherwise the smallness threshold"),
      GF_DOUBLE(gauge_fraction, "omega.gauge_fraction", "synthetic exact-part size relative to the coexact part"),
      GF_DOUBLE(gauge_tol, "gauge.tol", "criticality tolerance; <= 0 selects 1e-6 ||Omega||_{L2} + 1e-9"),
      GF_INT(gauge_max_iter, "gauge.max_iter", "descent iteration cap"),
      GF_DOUBLE(solver_tol, "solver.tol", "fixed-point step tolerance in the X norm"),
      GF_INT(solver_max_iter, "solver.max_iter", "fixed-point iteration cap"),
      GF_BOOL(probe, "solver.probe", "rerun from a random start and compare fixed points"),
      GF_U64(probe_seed, "solver.probe_seed", "seed of the probe start"),
      GF_LIST(resolutions, "study.resolutions", "doubling resolution ladder, >= 3 entries"),
      GF_STRING(quantity, "study.quantity", "conservation | sphere_divergence | tension | ab_residual"),
      GF_DOUBLE(floor, "study.floor", "residual level reported as the precision floor"),
  };
  return table;
}

#undef GF_INT
#undef GF_U64
#undef GF_DOUBLE
#undef GF_STRING
#undef GF_LIST
#undef GF_BOOL

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const Entry& e : entries()) {
    if (key == e.key) {
      e.set(config, value);
      return;
    }
  }
  throw Error("config: unknown key '" + key + "'");
}

std::string RunConfig::canonical_text() const {
  std::map<std::string, std::string> sorted;
  for (const Entry& e : entries()) sorted[e.key] = e.get(*this);
  std::string out;
  for (const auto& [k, v] : sorted) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const {
  const std::string text = canonical_text();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc32_of(text.data(), text.size())));
  return buf;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error("config: " + what); };
  if (n < 2 || n > 4) fail("grid.n must lie in 2..4");
  if (m < 2) fail("grid.m must be at least 2");
  if (res < 8 || res % 2 != 0) fail("grid.res must be even and >= 8");
  static const std::vector<std::string> kinds = {"constant", "geodesic", "perturbed", "heatflow", "synthetic_omega"};
  if (std::ranges::find(kinds, kind) == kinds.end()) fail("unknown map.kind '" + kind + "'");
  if (base != "constant" && base != "geodesic") fail("unknown map.base '" + base + "'");
  const bool uses_geodesic = kind == "geodesic" || ((kind == "perturbed" || kind == "heatflow") && base == "geodesic");
  if (uses_geodesic && static_cast<int>(wave.size()) != n) fail("map.wave needs n entries");
  if (uses_geodesic && axes.size() != 2) fail("map.axes needs two entries");
  if (delta < 0.0 || delta > 0.2) fail("map.delta must lie in [0, 0.2]");
  if (band < 1) fail("map.band must be positive");
  if (flow_time < 0.0) fail("map.flow_time must be nonnegative");
  if (!(tau_factor > 0.0) || tau_factor > 0.25) fail("map.tau_factor must lie in (0, 0.25]");
  if (epsilon < 0.0) fail("omega.epsilon must be nonnegative");
  if (gauge_fraction < 0.0) fail("omega.gauge_fraction must be nonnegative");
  if (gauge_max_iter < 0) fail("gauge.max_iter must be nonnegative");
  if (!(solver_tol > 0.0)) fail("solver.tol must be positive");
  if (solver_max_iter < 1) fail("solver.max_iter must be positive");
  if (!(floor > 0.0)) fail("study.floor must be positive");
  static const std::vector<std::string> quantities = {"conservation", "sphere_divergence", "tension", "ab_residual"};
  if (std::ranges::find(quantities, quantity) == quantities.end()) fail("unknown study.quantity '" + quantity + "'");
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  RunConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open " + path.string());
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error& e) {
      throw Error("config: " + path.string() + ": " + e.what());
    }
    for (const auto& item : items) {
      // CLI11 emits section open/close markers named "++" and "--".
      if (item.name == "++" || item.name == "--") continue;
      std::string value;
      for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
      apply_setting(config, item.fullname(), value);
    }
  }
  for (const std::string& assignment : overrides) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw Error("config: --set expects key=value, got '" + assignment + "'");
    apply_setting(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
  }
  config.validate();
  return config;
}

std::string config_keys_help() {
  std::string out;
  for (const Entry& e : entries()) {
    std::string key = e.key;
    key.resize(std::max<std::size_t>(key.size(), 22), ' ');
    out += "  " + key + e.help + " (default " + e.get(RunConfig{}) + ")\n";
  }
  return out;
}

}  // namespace gaugeflow
