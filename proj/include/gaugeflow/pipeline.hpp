#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gaugeflow/connection.hpp"
#include "gaugeflow/coulomb_gauge.hpp"
#include "gaugeflow/error.hpp"
#include "gaugeflow/harmonic_maps.hpp"
#include "gaugeflow/riviere_solver.hpp"
#include "gaugeflow/run_config.hpp"
#include "gaugeflow/verification.hpp"

namespace gaugeflow {

enum class Stage { generate = 0, omega, gauge, solve, verify, study };

Stage parse_stage(const std::string& command);
const char* stage_name(Stage stage);

/// A module error annotated with the stage it escaped from. Gauge and solver
/// failures keep their partial traces.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& config_hash, const std::string& what)
      : Error(std::string("stage ") + stage_name(stage) + " [config " + config_hash + "]: " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

  std::optional<GaugeDiagnostics> gauge_trace;
  std::optional<SolveReport> solve_trace;

 private:
  Stage stage_;
};

/// One asserted invariant of a run.
struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
};

/// Everything one pass of the pipeline produced, in memory.
struct PipelineRun {
  Grid grid;
  std::optional<MapField> u;
  HeatFlowTrace flow;
  int flow_steps = 0;
  double flow_tau = 0.0;
  std::optional<SyntheticConnection> synthetic;
  Form omega;
  std::optional<GaugePair> gauge;
  std::optional<ABSolution> solution;
  std::optional<ResidualReport> conservation;
  std::optional<ResidualReport> sphere_divergence;
  std::optional<TheoremBounds> bounds;
  std::vector<Check> checks;

  bool all_passed() const;
};

/// Runs the stages up to and including `last` (never study) at config.res.
PipelineRun run_stages(const RunConfig& config, Stage last);

/// The study quantity of one complete pass at the given resolution; clears
/// *checks_ok when an invariant of that pass failed.
double study_quantity(const RunConfig& config, int res, bool* checks_ok = nullptr);

/// CLI entry: runs `command`, writes fields, reports and tables into out, and
/// returns 0 iff every check held. Errors escape as StageError.
int run_command(const RunConfig& config, Stage command, const std::filesystem::path& out, std::ostream& log);

/// Column documentation of every CSV the pipeline writes, for --help.
std::string table_columns_help();

}  // namespace gaugeflow
