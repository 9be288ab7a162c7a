#pragma once

#include <vector>

#include "gaugeflow/error.hpp"
#include "gaugeflow/form.hpp"

namespace gaugeflow {

struct GaugeDiagnostics {
  double energy = 0.0;           // ||Omega_P||^2_{L2}
  double criticality = 0.0;      // ||d* Omega_P||_{L2}
  double harmonic = 0.0;         // ||constant part of Omega_P||_{L2}
  double representation = 0.0;   // ||d* xi - Omega_P||_{L2}
  double xi_antisymmetry = 0.0;  // defect removed when antisymmetrizing xi
  double orthogonality = 0.0;    // max ||P^T P - I|| over the grid
  int iterations = 0;
  double tolerance = 0.0;
  std::vector<double> energy_trace;
  std::vector<double> criticality_trace;
};

/// Rotation gauge P (SO(m)-valued 0-form) and 2-form xi with
/// P^{-1} dP + P^{-1} Omega P = d* xi up to the reported defects.
struct GaugePair {
  Form P;
  Form xi;  // empty until extract_xi
  GaugeDiagnostics diagnostics;

  bool complete() const { return !xi.empty(); }
};

struct GaugeOptions {
  double tol = 0.0;           // <= 0 selects 1e-6 ||Omega||_{L2} + 1e-9
  int max_iter = 5000;
  double initial_step = 0.0;  // <= 0 selects 0.1 / (1 + ||Omega||_inf)
};

/// Raised when the descent fails; carries the partial trace.
class GaugeError : public Error {
 public:
  GaugeError(const std::string& what, GaugeDiagnostics trace) : Error(what), trace_(std::move(trace)) {}
  const GaugeDiagnostics& trace() const { return trace_; }

 private:
  GaugeDiagnostics trace_;
};

/// Largest pointwise Frobenius norm of P^T P - I.
double orthogonality_defect(const Form& P);

/// Gauged connection Omega_P = P^T dP + P^T Omega P.
Form gauged_connection(const Form& P, const Form& omega);

/// ||Omega_P||^2_{L2}. P must be orthogonal to 1e-10.
double gauge_energy(const Form& P, const Form& omega);

/// Riemannian descent of gauge_energy over pointwise SO(m), starting at P = id.
/// The descent direction is the H^1 (Sobolev) gradient (-Laplacian)^{-1} d* Omega_P,
/// the step is P <- P exp(-tau eta) with Armijo backtracking, and the loop
/// stops once ||d* Omega_P||_{L2} <= tol.
GaugePair minimize_gauge(const Form& omega, const GaugeOptions& options = {});

/// Completes a gauge: removes the constant part of Omega_P and solves
/// xi = d (-Laplacian)^{-1} Omega_P, so d* xi is the coexact part of Omega_P.
GaugePair extract_xi(GaugePair gauge, const Form& omega);

struct GaugeBounds {
  double dp_n2 = 0.0;     // ||grad P||_{L^{n,2}}
  double dxi_n2 = 0.0;    // ||grad xi||_{L^{n,2}}
  double omega_n2 = 0.0;  // ||Omega||_{L^{n,2}}
  double ratio = 0.0;     // (dp_n2 + dxi_n2) / omega_n2
};

GaugeBounds gauge_bounds(const GaugePair& gauge, const Form& omega);

}  // namespace gaugeflow
