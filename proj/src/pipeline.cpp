#include "gaugeflow/pipeline.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/field_io.hpp"
#include "gaugeflow/lorentz.hpp"
#include "gaugeflow/pointwise.hpp"

namespace gaugeflow {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kStageNames[] = {"generate", "omega", "gauge", "solve", "verify", "study"};

bool is_map_kind(const RunConfig& c) { return c.kind != "synthetic_omega"; }

void add_check(PipelineRun& run, const std::string& name, double value, double limit, bool passed) {
  run.checks.push_back({name, value, limit, passed});
}
void add_upper(PipelineRun& run, const std::string& name, double value, double limit) {
  add_check(run, name, value, limit, value <= limit);
}

MapField build_base(const RunConfig& c, const Grid& grid) {
  if (c.kind == "constant" || ((c.kind == "perturbed" || c.kind == "heatflow") && c.base == "constant")) {
    return constant_map(grid, c.m, 0);
  }
  return geodesic_map(grid, c.m, c.wave, {c.axes[0], c.axes[1]});
}

double sphere_defect(const MapField& u) {
  double worst = 0.0;
  for (std::size_t p = 0; p < u.grid().points(); ++p) {
    double norm2 = 0.0;
    for (int i = 0; i < u.target_dim(); ++i) norm2 += u.values.at(0, i, 0, p) * u.values.at(0, i, 0, p);
    worst = std::max(worst, std::abs(norm2 - 1.0));
  }
  return worst;
}

double sup_difference(const Form& a, const Form& b) { return sup_norm(a - b); }

void stage_generate(const RunConfig& c, PipelineRun& run) {
  if (!is_map_kind(c)) return;
  MapField u = build_base(c, run.grid);
  if (c.kind == "perturbed" || c.kind == "heatflow") u = perturbed_map(u, c.delta, c.seed, c.band);
  if (c.kind == "heatflow" && c.flow_time > 0.0) {
    const double h = run.grid.spacing();
    const double tau_max = c.tau_factor * h * h;
    run.flow_steps = static_cast<int>(std::ceil(c.flow_time / tau_max - 1e-9));
    run.flow_tau = c.flow_time / run.flow_steps;
    u = heat_flow_relax(u, run.flow_tau, run.flow_steps, &run.flow);
    bool monotone = true;
    for (std::size_t k = 1; k < run.flow.energies.size(); ++k) {
      monotone = monotone && run.flow.energies[k] <= run.flow.energies[k - 1] * (1.0 + 1e-12);
    }
    add_check(run, "heat_flow_energy_nonincreasing", monotone ? 0.0 : 1.0, 0.0, monotone);
  }
  add_upper(run, "unit_sphere_defect", sphere_defect(u), 1e-12);
  add_upper(run, "tangency_defect", tangency_defect(u), 1e-8);
  run.u = std::move(u);
}

void stage_omega(const RunConfig& c, PipelineRun& run) {
  if (!is_map_kind(c)) {
    run.synthetic = synthetic_connection(run.grid, c.m, c.epsilon, c.gauge_fraction, c.seed, c.band);
    run.omega = run.synthetic->omega;
  } else {
    const MapField& u = *run.u;
    run.omega = omega_sphere(u);
    FrameConnection framed = omega_from_frame(u, sphere_frame(c.m));
    add_upper(run, "frame_consistency", sup_difference(framed.omega, run.omega), 1e-10);
    Form du = exterior_derivative(u.values);
    auto density = gradient_energy_density(du);
    Form expected = u.values;
    double scale = 1.0;
    for (int i = 0; i < c.m; ++i) {
      auto e = expected.field(0, i, 0);
      for (std::size_t p = 0; p < e.size(); ++p) e[p] *= density[p];
    }
    for (double d : density) scale = std::max(scale, d);
    add_upper(run, "omega_contraction_identity", sup_difference(contract(run.omega, du), expected) / scale, 1e-8);
  }
  Form sym = run.omega + transpose_values(run.omega);
  add_upper(run, "omega_antisymmetry", sup_norm(sym), 0.0);
}

void stage_gauge(const RunConfig& c, PipelineRun& run) {
  GaugeOptions options;
  options.tol = c.gauge_tol;
  options.max_iter = c.gauge_max_iter;
  GaugePair gauge = extract_xi(minimize_gauge(run.omega, options), run.omega);
  const auto& d = gauge.diagnostics;
  add_upper(run, "gauge_orthogonality", d.orthogonality, 1e-10);
  add_upper(run, "gauge_criticality", d.criticality, d.tolerance);
  add_upper(run, "xi_antisymmetry", d.xi_antisymmetry, 1e-10);
  double min_det = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < run.grid.points(); ++p) min_det = std::min(min_det, value_at(gauge.P, 0, p).determinant());
  add_check(run, "gauge_det_positive", min_det, 0.0, min_det > 0.0);
  run.gauge = std::move(gauge);
}

void stage_solve(const RunConfig& c, PipelineRun& run) {
  SolveOptions options;
  options.tol = c.solver_tol;
  options.max_iter = c.solver_max_iter;
  options.probe = c.probe;
  options.probe_seed = c.probe_seed;
  ABSolution sol = solve_ab(run.omega, *run.gauge, options);
  const SolveReport& r = sol.report;
  add_check(run, "contraction_kappa_bar", r.kappa_bar, 1.0, r.kappa_bar < 1.0);
  add_check(run, "invertibility", r.min_singular, 1.0 - r.fixed_point.sup_a - 1e-8, r.invertibility_held);
  if (r.probe_ran) add_upper(run, "uniqueness_probe", r.probe_distance, 10.0 * options.tol);
  add_upper(run, "ab_residual_within_budget", r.residual.l2, 1e-6 + r.budget);
  run.solution = std::move(sol);
}

void stage_verify(const RunConfig&, PipelineRun& run) {
  const ABSolution& sol = *run.solution;
  if (run.u) {
    run.conservation = conservation_residual(sol.A, sol.B, *run.u, run.omega);
    run.sphere_divergence = sphere_divergence_residual(*run.u);
    add_upper(run, "conservation_two_path_agreement", run.conservation->path_disagreement, 1e-8);
  }
  run.bounds = theorem_bounds(sol.A, sol.B, run.omega);
  add_check(run, "a_positive_determinant", run.bounds->nonpositive_det, 0.0, run.bounds->nonpositive_det == 0);
}

template <class F>
void guarded(Stage stage, const RunConfig& c, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const GaugeError& e) {
    StageError err(stage, c.hash(), e.what());
    err.gauge_trace = e.trace();
    throw err;
  } catch (const SolverError& e) {
    StageError err(stage, c.hash(), e.what());
    err.solve_trace = e.report();
    throw err;
  } catch (const std::exception& e) {
    throw StageError(stage, c.hash(), e.what());
  }
}

// ---- report helpers ----

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json header(const RunConfig& c, Stage stage) {
  Json j;
  j["stage"] = stage_name(stage);
  j["config_hash"] = c.hash();
  j["constants_version"] = RhsConstants::for_dimension(c.n).version;
  j["n"] = c.n;
  j["m"] = c.m;
  j["res"] = c.res;
  return j;
}

Json checks_json(const std::vector<Check>& checks, std::size_t from) {
  Json arr = Json::array();
  for (std::size_t i = from; i < checks.size(); ++i) {
    arr.push_back({{"name", checks[i].name},
                   {"value", checks[i].value},
                   {"limit", checks[i].limit},
                   {"passed", checks[i].passed}});
  }
  return arr;
}

Json xnorm_json(const XNorm& x) {
  return {{"sup_a", x.sup_a}, {"da_n2", x.da_n2}, {"db_n2", x.db_n2}, {"total", x.total}};
}

Json residual_json(const ResidualReport& r) {
  Json j{{"l2", r.l2}, {"sup", r.sup}};
  j["budget"] = {{"tension", r.budget.tension},
                 {"harmonic", r.budget.harmonic},
                 {"solver", r.budget.solver},
                 {"discretization", r.budget.discretization},
                 {"total", r.budget.total()}};
  j["coordinate_l2"] = r.coordinate_l2;
  j["path_disagreement"] = r.path_disagreement;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string gauge_trace_csv(const GaugeDiagnostics& d) {
  std::string csv = "iteration,energy,criticality\n";
  for (std::size_t k = 0; k < d.energy_trace.size(); ++k) {
    csv += std::to_string(k) + "," + num(d.energy_trace[k]) + "," + num(d.criticality_trace[k]) + "\n";
  }
  return csv;
}

std::string solve_csv(const SolveReport& r) {
  std::string csv = "iteration,x_total,x_sup_a,x_da_n2,x_db_n2,step_total,step_sup_a,step_da_n2,step_db_n2,kappa\n";
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    const auto& t = r.trace[k];
    csv += std::to_string(k + 1) + "," + num(t.iterate.total) + "," + num(t.iterate.sup_a) + "," +
           num(t.iterate.da_n2) + "," + num(t.iterate.db_n2) + "," + num(t.difference.total) + "," +
           num(t.difference.sup_a) + "," + num(t.difference.da_n2) + "," + num(t.difference.db_n2) + "," +
           num(t.kappa) + "\n";
  }
  return csv;
}

std::string kappa_dat(const SolveReport& r) {
  std::string dat = "# iteration kappa\n";
  for (std::size_t k = 1; k < r.trace.size(); ++k) dat += std::to_string(k + 1) + " " + num(r.trace[k].kappa) + "\n";
  return dat;
}

void write_stage_outputs(const RunConfig& c, const PipelineRun& run, Stage stage, const fs::path& out,
                         std::size_t checks_from, std::size_t checks_to) {
  std::vector<Check> checks(run.checks.begin() + checks_from, run.checks.begin() + checks_to);
  Json j = header(c, stage);
  switch (stage) {
    case Stage::generate: {
      j["map_kind"] = c.kind;
      if (run.u) {
        write_field(out / "u.bin", run.u->values);
        j["dirichlet_energy"] = dirichlet_energy(*run.u);
        j["tension_residual"] = tension_residual(*run.u);
        j["tangency_defect"] = tangency_defect(*run.u);
        j["unit_sphere_defect"] = sphere_defect(*run.u);
        if (c.kind == "heatflow") {
          j["heat_flow"] = {{"steps", run.flow_steps},
                            {"tau", run.flow_tau},
                            {"time", run.flow_tau * run.flow_steps},
                            {"halvings", run.flow.halvings},
                            {"energy_initial", run.flow.energies.empty() ? 0.0 : run.flow.energies.front()},
                            {"energy_final", run.flow.energies.empty() ? 0.0 : run.flow.energies.back()}};
        }
      } else {
        j["note"] = "synthetic connection: no map";
      }
      break;
    }
    case Stage::omega: {
      write_field(out / "omega.bin", run.omega);
      const double n2 = lorentz_norm(run.omega, c.n, 2.0);
      j["omega_l2"] = l2_norm(run.omega);
      j["omega_n2"] = n2;
      j["omega_n1"] = lorentz_norm(run.omega, c.n, 1.0);
      j["omega_sup"] = sup_norm(run.omega);
      j["epsilon"] = c.epsilon;
      j["within_theorem_regime"] = n2 <= c.epsilon;
      if (run.u) {
        j["riviere_residual"] = riviere_residual(*run.u, run.omega);
        j["growth_constant"] = omega_from_frame(*run.u, sphere_frame(c.m)).growth_constant;
      }
      break;
    }
    case Stage::gauge: {
      const GaugePair& g = *run.gauge;
      write_field(out / "P.bin", g.P);
      write_field(out / "xi.bin", g.xi);
      const auto& d = g.diagnostics;
      j["iterations"] = d.iterations;
      j["tolerance"] = d.tolerance;
      j["energy"] = d.energy;
      j["criticality"] = d.criticality;
      j["harmonic"] = d.harmonic;
      j["representation"] = d.representation;
      j["xi_antisymmetry"] = d.xi_antisymmetry;
      j["orthogonality"] = d.orthogonality;
      GaugeBounds b = gauge_bounds(g, run.omega);
      j["bounds"] = {{"dp_n2", b.dp_n2}, {"dxi_n2", b.dxi_n2}, {"omega_n2", b.omega_n2}, {"ratio", b.ratio}};
      write_text(out / "gauge_trace.csv", gauge_trace_csv(d));
      break;
    }
    case Stage::solve: {
      const ABSolution& s = *run.solution;
      const SolveReport& r = s.report;
      write_field(out / "A.bin", s.A);
      write_field(out / "B.bin", s.B);
      j["iterations"] = r.iterations;
      j["kappa_bar"] = r.kappa_bar;
      j["fixed_point"] = xnorm_json(r.fixed_point);
      j["left_unit_ball"] = r.fixed_point.total > 1.0;
      j["residual"] = {{"l2", r.residual.l2}, {"sup", r.residual.sup}, {"harmonic", r.residual.harmonic}};
      j["solver_harmonic"] = r.solver_harmonic;
      j["solver_nonharmonic"] = r.solver_nonharmonic;
      j["gauge_defect"] = r.gauge_defect;
      j["budget"] = r.budget;
      j["da_n1"] = r.da_n1;
      j["db_n2"] = r.db_n2;
      j["dist_so"] = r.dist_so.sup;
      j["nonpositive_det"] = r.dist_so.nonpositive_det;
      j["min_singular"] = r.min_singular;
      j["probe"] = {{"ran", r.probe_ran}, {"distance", r.probe_distance}, {"agreed", r.probe_agreed}};
      write_text(out / "solve_iterations.csv", solve_csv(r));
      write_text(out / "kappa.dat", kappa_dat(r));
      break;
    }
    case Stage::verify: {
      std::string csv = "quantity,l2,sup,budget_tension,budget_harmonic,budget_solver,budget_discretization,"
                        "budget_total,path_disagreement\n";
      auto row = [&](const std::string& name, const ResidualReport& r) {
        csv += name + "," + num(r.l2) + "," + num(r.sup) + "," + num(r.budget.tension) + "," +
               num(r.budget.harmonic) + "," + num(r.budget.solver) + "," + num(r.budget.discretization) + "," +
               num(r.budget.total()) + "," + num(r.path_disagreement) + "\n";
      };
      if (run.conservation) {
        j["conservation"] = residual_json(*run.conservation);
        j["sphere_divergence"] = residual_json(*run.sphere_divergence);
        j["tension_residual"] = tension_residual(*run.u);
        row("conservation", *run.conservation);
        row("sphere_divergence", *run.sphere_divergence);
      } else {
        j["conservation"] = "not applicable: synthetic connection has no map";
      }
      const AbResidual& ab = run.solution->report.residual;
      ResidualReport ab_row;
      ab_row.l2 = ab.l2;
      ab_row.sup = ab.sup;
      row("ab_residual", ab_row);
      const TheoremBounds& t = *run.bounds;
      j["theorem_bounds"] = {{"dist_so", t.dist_so}, {"nonpositive_det", t.nonpositive_det},
                             {"da_n1", t.da_n1},     {"db_n2", t.db_n2},
                             {"omega_n2", t.omega_n2}, {"ratio", t.ratio},
                             {"note", t.ratio_note}};
      write_text(out / "verify.csv", csv);
      break;
    }
    case Stage::study:
      break;
  }
  j["checks"] = checks_json(checks, 0);
  write_json(out / (std::string(stage_name(stage)) + ".json"), j);
}

}  // namespace

Stage parse_stage(const std::string& command) {
  for (int s = 0; s <= static_cast<int>(Stage::study); ++s) {
    if (command == kStageNames[s]) return static_cast<Stage>(s);
  }
  throw Error("unknown command '" + command + "'");
}

const char* stage_name(Stage stage) { return kStageNames[static_cast<int>(stage)]; }

bool PipelineRun::all_passed() const {
  return std::ranges::all_of(checks, [](const Check& c) { return c.passed; });
}

namespace {

// Runs the stages and records where each stage's checks start, so reports can
// list their own checks.
PipelineRun run_stages_marked(const RunConfig& c, Stage last, std::vector<std::size_t>* marks) {
  if (last == Stage::study) throw Error("run_stages: study is not a single pass");
  PipelineRun run;
  guarded(Stage::generate, c, [&] { run.grid = Grid(c.n, c.res); });
  using Body = void (*)(const RunConfig&, PipelineRun&);
  constexpr Body bodies[] = {stage_generate, stage_omega, stage_gauge, stage_solve, stage_verify};
  for (int s = 0; s <= static_cast<int>(last); ++s) {
    if (marks) marks->push_back(run.checks.size());
    guarded(static_cast<Stage>(s), c, [&] { bodies[s](c, run); });
  }
  if (marks) marks->push_back(run.checks.size());
  return run;
}

}  // namespace

PipelineRun run_stages(const RunConfig& config, Stage last) { return run_stages_marked(config, last, nullptr); }

double study_quantity(const RunConfig& config, int res, bool* checks_ok) {
  RunConfig c = config;
  c.res = res;
  c.validate();
  const bool needs_map = c.quantity != "ab_residual";
  if (needs_map && !is_map_kind(c)) throw Error("study: quantity '" + c.quantity + "' needs a map");
  Stage last = Stage::verify;
  if (c.quantity == "tension" || c.quantity == "sphere_divergence") last = Stage::generate;
  if (c.quantity == "ab_residual") last = Stage::solve;
  PipelineRun run = run_stages(c, last);
  if (checks_ok && !run.all_passed()) *checks_ok = false;
  if (c.quantity == "tension") return tension_residual(*run.u);
  if (c.quantity == "sphere_divergence") return sphere_divergence_residual(*run.u).l2;
  if (c.quantity == "ab_residual") return run.solution->report.residual.l2;
  return run.conservation->l2;
}

int run_command(const RunConfig& c, Stage command, const fs::path& out, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw StageError(command, c.hash(), "cannot create output directory " + out.string());
  write_text(out / "config.txt", c.canonical_text());

  if (command == Stage::study) {
    bool ok = true;
    StudyResult study;
    guarded(Stage::study, c, [&] {
      study = convergence_study(c.resolutions, [&](int res) { return study_quantity(c, res, &ok); }, c.floor);
    });
    const std::string order = study.estimate.at_floor ? "floor"
                              : study.estimate.order ? num(*study.estimate.order)
                                                     : "undefined";
    std::string csv = "res,h,residual,order\n";
    std::string dat = "# h residual\n";
    Json rows = Json::array();
    for (const StudyRow& r : study.rows) {
      csv += std::to_string(r.res) + "," + num(r.h) + "," + num(r.residual) + "," + order + "\n";
      dat += num(r.h) + " " + num(r.residual) + "\n";
      rows.push_back({{"res", r.res}, {"h", r.h}, {"residual", r.residual}});
    }
    Json j = header(c, Stage::study);
    j["quantity"] = c.quantity;
    j["rows"] = rows;
    j["order"] = order;
    j["floor"] = c.floor;
    j["checks_passed"] = ok;
    write_text(out / "study.csv", csv);
    write_text(out / "study.dat", dat);
    write_json(out / "study.json", j);
    log << "study " << c.quantity << ": order " << order << (ok ? "" : " (checks failed)") << "\n";
    return ok ? 0 : 1;
  }

  std::vector<std::size_t> marks;
  PipelineRun run;
  try {
    run = run_stages_marked(c, command, &marks);
  } catch (const StageError& e) {
    // Keep the partial traces next to the error.
    if (e.gauge_trace) write_text(out / "gauge_trace.csv", gauge_trace_csv(*e.gauge_trace));
    if (e.solve_trace) write_text(out / "solve_iterations.csv", solve_csv(*e.solve_trace));
    Json j = header(c, e.stage());
    j["error"] = e.what();
    write_json(out / "error.json", j);
    throw;
  }
  for (int s = 0; s <= static_cast<int>(command); ++s) {
    guarded(static_cast<Stage>(s), c,
            [&] { write_stage_outputs(c, run, static_cast<Stage>(s), out, marks[s], marks[s + 1]); });
  }
  for (const Check& check : run.checks) {
    log << (check.passed ? "ok   " : "FAIL ") << check.name << " = " << num(check.value) << " (limit "
        << num(check.limit) << ")\n";
  }
  return run.all_passed() ? 0 : 1;
}

std::string table_columns_help() {
  return "Tables written to --out (columns fixed; new columns are only appended):\n"
         "  gauge_trace.csv       iteration,energy,criticality\n"
         "  solve_iterations.csv  iteration,x_total,x_sup_a,x_da_n2,x_db_n2,step_total,step_sup_a,\n"
         "                        step_da_n2,step_db_n2,kappa\n"
         "  verify.csv            quantity,l2,sup,budget_tension,budget_harmonic,budget_solver,\n"
         "                        budget_discretization,budget_total,path_disagreement\n"
         "  study.csv             res,h,residual,order\n"
         "  kappa.dat             iteration kappa   (two columns, whitespace separated)\n"
         "  study.dat             h residual        (two columns, whitespace separated)\n";
}

}  // namespace gaugeflow
