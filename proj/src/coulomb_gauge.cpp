#include "gaugeflow/coulomb_gauge.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/lorentz.hpp"
#include "gaugeflow/parallel.hpp"
#include "gaugeflow/pointwise.hpp"

namespace gaugeflow {

namespace {

constexpr double kAbsoluteTolerance = 1e-9;

constexpr double kArmijo = 1e-4;
constexpr double kMaxStep = 1.0;
constexpr int kMaxBacktracks = 60;
// Energy flat to rounding for this many accepted steps means the discrete
// minimizer is reached; the remaining criticality is discretization error.
constexpr int kStallSteps = 20;
constexpr double kStallRelative = 1e-15;

// P <- P exp(-step * eta) pointwise, followed by a polar projection when the
// orthogonality defect exceeds 1e-12.
Form retract(const Form& P, const Form& eta, double step) {
  Form out(P.grid(), 0, P.shape());
  const std::size_t points = P.points();
  const std::size_t chunk = 4096;
  parallel_for((points + chunk - 1) / chunk, [&](std::size_t block) {
    const std::size_t end = std::min(points, (block + 1) * chunk);
    for (std::size_t p = block * chunk; p < end; ++p) {
      Eigen::MatrixXd next = value_at(P, 0, p) * (-step * value_at(eta, 0, p)).exp();
      const Eigen::MatrixXd gram = next.transpose() * next;
      if ((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).norm() > 1e-12) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(next, Eigen::ComputeFullU | Eigen::ComputeFullV);
        next = svd.matrixU() * svd.matrixV().transpose();
      }
      set_value(out, 0, p, next);
    }
  });
  return out;
}

}  // namespace

double orthogonality_defect(const Form& P) {
  if (P.degree() != 0 || P.rows() != P.cols()) throw Error("orthogonality_defect: expected a square 0-form");
  double worst = 0.0;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  for (std::size_t p = 0; p < P.points(); ++p) {
    Eigen::MatrixXd v = value_at(P, 0, p);
    worst = std::max(worst, (v.transpose() * v - id).norm());
  }
  return worst;
}

Form gauged_connection(const Form& P, const Form& omega) {
  Form Pt = transpose_values(P);
  Form out = wedge(Pt, exterior_derivative(P)) + wedge(wedge(Pt, omega), P);
  out.mark_skew(omega.skew());
  return out;
}

double gauge_energy(const Form& P, const Form& omega) {
  if (orthogonality_defect(P) > 1e-10) throw Error("gauge_energy: P is not orthogonal");
  Form gauged = gauged_connection(P, omega);
  return l2_inner(gauged, gauged);
}

GaugePair minimize_gauge(const Form& omega, const GaugeOptions& options) {
  if (omega.degree() != 1 || omega.rows() != omega.cols()) throw Error("minimize_gauge: expected a matrix 1-form");
  const int m = omega.rows();
  const double omega_l2 = l2_norm(omega);
  GaugePair gauge{Form::identity(omega.grid(), m), Form{}, {}};
  GaugeDiagnostics& diag = gauge.diagnostics;
  // The absolute term sits above the roundoff of differentiating P ~ id twice.
  diag.tolerance = options.tol > 0.0 ? options.tol : 1e-6 * omega_l2 + kAbsoluteTolerance;
  double step = options.initial_step > 0.0 ? options.initial_step : 0.1 / (1.0 + sup_norm(omega));

  Form gauged = gauged_connection(gauge.P, omega);
  double energy = l2_inner(gauged, gauged);
  int flat_steps = 0;
  for (int iter = 0;; ++iter) {
    Form criticality = codifferential(gauged);
    const double residual = l2_norm(criticality);
    diag.energy_trace.push_back(energy);
    diag.criticality_trace.push_back(residual);
    diag.energy = energy;
    diag.criticality = residual;
    diag.iterations = iter;
    if (residual <= diag.tolerance) break;
    if (flat_steps >= kStallSteps) {
      throw GaugeError("minimize_gauge: energy stalled with criticality " + sci(residual) + " > tol " +
                           sci(diag.tolerance) + " (discretization floor; refine the grid or loosen tol)",
                       diag);
    }
    if (iter >= options.max_iter) {
      throw GaugeError("minimize_gauge: max_iter reached with criticality " + sci(residual) +
                           " > tol " + sci(diag.tolerance),
                       diag);
    }

    // H^1 gradient; L2 gradient of the energy is 2 d* Omega_P.
    Form direction = solve_poisson(criticality, false);
    direction.antisymmetrize();
    const double slope = 2.0 * l2_inner(criticality, direction);

    bool accepted = false;
    for (int attempt = 0; attempt < kMaxBacktracks; ++attempt) {
      Form trial = retract(gauge.P, direction, step);
      Form trial_gauged = gauged_connection(trial, omega);
      const double trial_energy = l2_inner(trial_gauged, trial_gauged);
      if (trial_energy <= energy - kArmijo * step * slope) {
        flat_steps = energy - trial_energy <= kStallRelative * energy ? flat_steps + 1 : 0;
        gauge.P = std::move(trial);
        gauged = std::move(trial_gauged);
        energy = trial_energy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw GaugeError("minimize_gauge: line search failed with criticality " + sci(residual), diag);
    }
    step = std::min(2.0 * step, kMaxStep);
  }
  diag.orthogonality = orthogonality_defect(gauge.P);
  return gauge;
}

GaugePair extract_xi(GaugePair gauge, const Form& omega) {
  GaugeDiagnostics& diag = gauge.diagnostics;
  Form gauged = gauged_connection(gauge.P, omega);
  Form harmonic = harmonic_part(gauged);
  gauge.xi = exterior_derivative(solve_poisson(gauged - harmonic, false));
  diag.xi_antisymmetry = gauge.xi.antisymmetrize();
  diag.harmonic = l2_norm(harmonic);
  diag.representation = l2_norm(codifferential(gauge.xi) - gauged);
  diag.criticality = l2_norm(codifferential(gauged));
  diag.energy = l2_inner(gauged, gauged);
  diag.orthogonality = orthogonality_defect(gauge.P);
  return gauge;
}

GaugeBounds gauge_bounds(const GaugePair& gauge, const Form& omega) {
  const double n = omega.grid().dim();
  GaugeBounds b;
  b.dp_n2 = gradient_lorentz_norm(gauge.P, n, 2.0);
  b.dxi_n2 = gauge.complete() ? gradient_lorentz_norm(gauge.xi, n, 2.0) : 0.0;
  b.omega_n2 = lorentz_norm(omega, n, 2.0);
  b.ratio = b.omega_n2 > 0.0 ? (b.dp_n2 + b.dxi_n2) / b.omega_n2 : 0.0;
  return b;
}

}  // namespace gaugeflow
