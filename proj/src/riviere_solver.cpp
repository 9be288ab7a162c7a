#include "gaugeflow/riviere_solver.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/lorentz.hpp"
#include "gaugeflow/pointwise.hpp"
#include "gaugeflow/random_forms.hpp"

namespace gaugeflow {

namespace {

constexpr double kMeanLimit = 1e-8;
constexpr double kClosedLimit = 1e-8;
constexpr int kDivergenceRun = 3;

bool finite(const XNorm& x) { return std::isfinite(x.total); }

Form plus_identity(const Form& a) {
  Form out = a;
  for (int i = 0; i < a.rows(); ++i) {
    for (double& v : out.field(0, i, i)) v += 1.0;
  }
  return out;
}

// Removes the grid mean of a Poisson right-hand side after checking that it
// is at rounding level.
Form checked_zero_mean(Form rhs, const char* which) {
  const double mean = max_abs_mean(rhs);
  const double scale = std::max(1.0, max_abs_entry(rhs));
  if (!(mean <= kMeanLimit * scale)) {
    throw Error(std::string("picard_step: exactness identity broken in the ") + which + " right-hand side (mean " +
                sci(mean) + " at scale " + sci(scale) + ")");
  }
  rhs -= harmonic_part(rhs);
  return rhs;
}

}  // namespace

ABState zero_state(const Grid& grid, int m) { return {Form::matrix(grid, 0, m), Form::matrix(grid, 2, m)}; }

ABState operator-(const ABState& x, const ABState& y) { return {x.a_hat - y.a_hat, x.b - y.b}; }

XNorm x_norm(const ABState& s) {
  const double n = s.a_hat.grid().dim();
  XNorm x;
  x.sup_a = sup_norm(s.a_hat);
  x.da_n2 = gradient_lorentz_norm(s.a_hat, n, 2.0);
  x.db_n2 = gradient_lorentz_norm(s.b, n, 2.0);
  x.total = x.sup_a + x.da_n2 + x.db_n2;
  return x;
}

RhsConstants RhsConstants::for_dimension(int n) {
  RhsConstants c;
  c.version = "ab-rhs-v1/n" + std::to_string(n);
  c.a_xi = -1.0;
  c.a_b = n % 2 == 1 ? 1.0 : -1.0;  // (-1)^{n-1}
  c.b_p = 1.0;
  c.b_xi = 1.0;
  return c;
}

PicardMap::PicardMap(const GaugePair& gauge) : PicardMap(gauge, RhsConstants::for_dimension(gauge.P.grid().dim())) {}

PicardMap::PicardMap(const GaugePair& gauge, RhsConstants constants)
    : constants_(std::move(constants)), P_(gauge.P), Pt_(transpose_values(gauge.P)) {
  if (!gauge.complete()) throw Error("picard_step: gauge has no xi");
  dP_ = exterior_derivative(P_);
  dPt_ = exterior_derivative(Pt_);
  d_star_xi_ = exterior_derivative(hodge_star(gauge.xi));
  d_star_xi_Pt_ = wedge(d_star_xi_, Pt_);
}

Form PicardMap::rhs_a(const ABState& s) const {
  Form da = exterior_derivative(s.a_hat);
  Form out = hodge_star(wedge(da, d_star_xi_));
  out *= constants_.a_xi;
  Form coupling = hodge_star(wedge(exterior_derivative(hodge_star(s.b)), dP_));
  coupling *= constants_.a_b;
  out += coupling;
  return out;
}

Form PicardMap::rhs_b(const ABState& s) const {
  Form out = wedge(exterior_derivative(s.a_hat), dPt_);
  out *= constants_.b_p;
  Form flux = wedge(s.a_hat, d_star_xi_Pt_) + d_star_xi_Pt_;
  Form source = hodge_star(codifferential(flux));
  source *= constants_.b_xi;
  out += source;
  return out;
}

ABState PicardMap::operator()(const ABState& s) const {
  ABState next;
  next.a_hat = solve_poisson(checked_zero_mean(rhs_a(s), "A"), true);
  next.b = project_closed(solve_poisson(checked_zero_mean(rhs_b(s), "B"), true));
  if (grid().dim() > 2) {
    const double closed = l2_norm(exterior_derivative(next.b));
    if (!(closed <= kClosedLimit)) {
      throw Error("picard_step: projected B is not closed (||dB|| = " + sci(closed) + ")");
    }
  }
  return next;
}

Form ab_residual_form(const Form& A, const Form& B, const Form& omega) {
  if (A.degree() != 0 || B.degree() != 2 || omega.degree() != 1) throw Error("ab_residual: degree mismatch");
  return exterior_derivative(A) - wedge(A, omega) + codifferential(B);
}

AbResidual ab_residual(const Form& A, const Form& B, const Form& omega) {
  Form r = ab_residual_form(A, B, omega);
  return {l2_norm(r), sup_norm(r), l2_norm(harmonic_part(r))};
}

RotationDistance distance_to_rotations(const Form& A) {
  if (A.degree() != 0 || A.rows() != A.cols()) throw Error("distance_to_rotations: expected a square 0-form");
  RotationDistance out;
  for (std::size_t p = 0; p < A.points(); ++p) {
    Eigen::MatrixXd v = value_at(A, 0, p);
    if (v.determinant() <= 0.0) {
      ++out.nonpositive_det;
      continue;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
    const Eigen::VectorXd sigma = svd.singularValues();
    out.sup = std::max(out.sup, (sigma.array() - 1.0).matrix().norm());
  }
  return out;
}

ABState iterate_fixed_point(const PicardMap& map, ABState s, const SolveOptions& options, SolveReport& report) {
  report.constants_version = map.constants().version;
  report.trace.clear();
  report.kappa_bar = 0.0;
  double previous = 0.0;
  int run = 0;
  for (int k = 1; k <= options.max_iter; ++k) {
    ABState next = map(s);
    IterationRecord rec;
    rec.difference = x_norm(next - s);
    rec.iterate = x_norm(next);
    // Ratios of steps already at rounding level carry no information.
    const double floor = 1e-14 * std::max(1.0, rec.iterate.total);
    if (previous > floor) rec.kappa = rec.difference.total / previous;
    report.trace.push_back(rec);
    report.iterations = k;
    if (k >= 2) report.kappa_bar = std::max(report.kappa_bar, rec.kappa);
    s = std::move(next);

    if (!finite(rec.iterate) || !finite(rec.difference)) {
      throw SolverError("solve_ab: outside contraction regime (non-finite iterate at step " + std::to_string(k) + ")",
                        report);
    }
    run = rec.kappa >= 1.0 ? run + 1 : 0;
    if (run >= kDivergenceRun) {
      throw SolverError("solve_ab: outside contraction regime (kappa >= 1 for " + std::to_string(kDivergenceRun) +
                            " consecutive steps, last " + sci(rec.kappa) + ")",
                        report);
    }
    if (rec.difference.total <= options.tol) {
      report.fixed_point = rec.iterate;
      return s;
    }
    previous = rec.difference.total;
  }
  throw SolverError("solve_ab: max_iter " + std::to_string(options.max_iter) + " reached with step " +
                        sci(previous),
                    report);
}

ABState random_state(const Grid& grid, int m, double radius, std::uint64_t seed) {
  ABState s;
  s.a_hat = random_band_limited(grid, 0, {m, m}, seed, 2);
  s.b = project_closed(random_band_limited(grid, 2, {m, m}, seed + 1, 2));
  const double scale = radius / x_norm(s).total;
  s.a_hat *= scale;
  s.b *= scale;
  return s;
}

ABSolution solve_ab(const Form& omega, const GaugePair& gauge, const SolveOptions& options) {
  if (!gauge.complete()) throw Error("solve_ab: gauge has no xi");
  if (omega.degree() != 1 || omega.rows() != gauge.P.rows()) throw Error("solve_ab: omega does not match the gauge");
  const Grid& grid = omega.grid();
  const int m = omega.rows();
  const double n = grid.dim();

  PicardMap map(gauge);
  ABSolution sol;
  SolveReport& report = sol.report;
  sol.state = iterate_fixed_point(map, zero_state(grid, m), options, report);

  const Form a_tilde = plus_identity(sol.state.a_hat);
  sol.A = wedge(a_tilde, map.Pt());
  sol.B = sol.state.b;

  report.residual = ab_residual(sol.A, sol.B, omega);
  const Form d_star_xi = codifferential(gauge.xi);
  Form first_order = exterior_derivative(a_tilde) - wedge(a_tilde, d_star_xi) + wedge(codifferential(sol.B), map.P());
  Form constant = harmonic_part(first_order);
  report.solver_harmonic = l2_norm(constant);
  report.solver_nonharmonic = l2_norm(first_order - constant);
  report.gauge_defect = l2_norm(wedge(a_tilde, gauged_connection(gauge.P, omega) - d_star_xi));
  report.budget = report.solver_harmonic + report.gauge_defect;

  report.da_n1 = gradient_lorentz_norm(sol.A, n, 1.0);
  report.db_n2 = gradient_lorentz_norm(sol.B, n, 2.0);
  report.dist_so = distance_to_rotations(sol.A);

  double min_sigma = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid.points(); ++p) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(value_at(a_tilde, 0, p));
    min_sigma = std::min(min_sigma, svd.singularValues().minCoeff());
  }
  report.min_singular = min_sigma;
  const double a_sup = report.fixed_point.sup_a;
  report.invertibility_held = a_sup >= 1.0 || min_sigma >= 1.0 - a_sup - 1e-8;

  if (options.probe) {
    report.probe_ran = true;
    SolveReport probe_report;
    try {
      ABState other = iterate_fixed_point(map, random_state(grid, m, 0.5, options.probe_seed), options, probe_report);
      report.probe_distance = x_norm(other - sol.state).total;
      report.probe_agreed = report.probe_distance <= 10.0 * options.tol;
    } catch (const SolverError&) {
      report.probe_distance = std::numeric_limits<double>::infinity();
      report.probe_agreed = false;
    }
  }
  return sol;
}

}  // namespace gaugeflow
