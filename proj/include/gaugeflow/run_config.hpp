#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gaugeflow {

/// Every tunable of a pipeline run. Keys are "section.name"; the config file
/// uses [section] headers with name = value lines, and --set section.name=value
/// overrides any of them.
struct RunConfig {
  // [grid]
  int n = 3;
  int m = 3;
  int res = 32;
  // [map]
  std::string kind = "perturbed";  // constant | geodesic | perturbed | heatflow | synthetic_omega
  std::string base = "constant";   // base map of perturbed/heatflow: constant | geodesic
  std::vector<int> wave = {1, 0, 0};
  std::vector<int> axes = {0, 1};
  double delta = 0.05;
  std::uint64_t seed = 1;
  int band = 2;
  double flow_time = 0.25;   // heatflow: physical time; steps = ceil(flow_time / tau)
  double tau_factor = 0.25;  // heatflow: tau = tau_factor h^2
  // [omega]
  double epsilon = 0.01;  // synthetic_omega: ||Omega||_{L^{n,2}}; otherwise the smallness threshold
  double gauge_fraction = 1.0;
  // [gauge]
  double gauge_tol = 0.0;  // <= 0: 1e-6 ||Omega||_{L2} + 1e-9
  int gauge_max_iter = 5000;
  // [solver]
  double solver_tol = 1e-8;
  int solver_max_iter = 200;
  bool probe = true;
  std::uint64_t probe_seed = 7;
  // [study]
  std::vector<int> resolutions = {16, 32, 64};
  std::string quantity = "conservation";  // conservation | sphere_divergence | tension | ab_residual
  double floor = 1e-10;

  /// Sorted "key=value" lines of every key, defaults included.
  std::string canonical_text() const;
  /// CRC-32 of canonical_text(), as 8 hex digits.
  std::string hash() const;
  /// Throws Error when a value is out of range.
  void validate() const;
};

/// Reads the config file (may be empty path for defaults) and applies the
/// key=value overrides in order. Unknown keys are errors.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// Applies one "section.name=value" assignment.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Documentation of every key, for --help.
std::string config_keys_help();

}  // namespace gaugeflow
