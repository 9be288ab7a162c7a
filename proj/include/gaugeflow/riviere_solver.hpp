#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaugeflow/coulomb_gauge.hpp"
#include "gaugeflow/error.hpp"
#include "gaugeflow/form.hpp"

namespace gaugeflow {

/// Iterate of the fixed-point map: a (matrix 0-form, the correction A P - id)
/// and b (closed matrix 2-form).
struct ABState {
  Form a_hat;
  Form b;
};

ABState zero_state(const Grid& grid, int m);
ABState operator-(const ABState& x, const ABState& y);

/// ||a||_inf + ||grad a||_{L^{n,2}} + ||grad b||_{L^{n,2}}.
struct XNorm {
  double sup_a = 0.0;
  double da_n2 = 0.0;
  double db_n2 = 0.0;
  double total = 0.0;
};

XNorm x_norm(const ABState& s);

/// Coefficients of the two Poisson right-hand sides
///   -Lap a' = a_xi *(da ^ d*xi) + a_b *(d*b ^ dP)
///   -Lap b' = b_p da ^ dP^{-1} + b_xi *d*((a + id) d*xi P^{-1}),   b' <- closed part,
/// where *xi abbreviates the (n-2)-form star xi. They follow from applying d*
/// and d to  d(A P) - (A P) d*xi = -(d*B) P  with A P = id + a.
struct RhsConstants {
  std::string version;
  double a_xi = 0.0;
  double a_b = 0.0;
  double b_p = 0.0;
  double b_xi = 0.0;

  static RhsConstants for_dimension(int n);
};

/// Input data of one Picard step, precomputed from a completed gauge.
class PicardMap {
 public:
  explicit PicardMap(const GaugePair& gauge);
  /// Same map with a caller-supplied table, for calibration experiments.
  PicardMap(const GaugePair& gauge, RhsConstants constants);

  const RhsConstants& constants() const { return constants_; }
  const Form& P() const { return P_; }
  const Form& Pt() const { return Pt_; }
  int m() const { return P_.rows(); }
  const Grid& grid() const { return P_.grid(); }

  /// Right-hand sides before the mean check and the Poisson solves.
  Form rhs_a(const ABState& s) const;
  Form rhs_b(const ABState& s) const;

  /// T(a, b). Both Poisson problems read the current state (Jacobi order).
  /// Throws when a right-hand side has a grid mean above 1e-8 ("exactness
  /// identity broken") or when the projected b is not closed to 1e-8.
  ABState operator()(const ABState& s) const;

 private:
  RhsConstants constants_;
  Form P_;
  Form Pt_;
  Form dP_;
  Form dPt_;
  Form d_star_xi_;   // (n-1)-form d(*xi)
  Form d_star_xi_Pt_;
};

/// || dA - A Omega + d*B ||: L2 norm, pointwise sup and L2 norm of the grid
/// mean of the residual 1-form.
struct AbResidual {
  double l2 = 0.0;
  double sup = 0.0;
  double harmonic = 0.0;
};

Form ab_residual_form(const Form& A, const Form& B, const Form& omega);
AbResidual ab_residual(const Form& A, const Form& B, const Form& omega);

/// Largest pointwise Frobenius distance from A to its polar factor, over
/// points with det A > 0; points with det A <= 0 are counted instead.
struct RotationDistance {
  double sup = 0.0;
  int nonpositive_det = 0;
};

RotationDistance distance_to_rotations(const Form& A);

struct SolveOptions {
  double tol = 1e-8;  // absolute, x_norm of successive differences
  int max_iter = 200;
  bool probe = true;  // rerun from a random state in the unit ball
  std::uint64_t probe_seed = 7;
};

struct IterationRecord {
  XNorm iterate;
  XNorm difference;
  double kappa = 0.0;  // difference / previous difference; 0 when undefined
};

struct SolveReport {
  std::string constants_version;
  std::vector<IterationRecord> trace;
  int iterations = 0;
  double kappa_bar = 0.0;  // largest contraction ratio from the second ratio on
  XNorm fixed_point;

  AbResidual residual;
  // First-order defect E = dA~ - A~ d*xi + (d*B) P with A~ = A P. On the torus
  // its constant part cannot be removed by the Poisson solves.
  double solver_harmonic = 0.0;     // ||mean E||
  double solver_nonharmonic = 0.0;  // ||E - mean E||
  double gauge_defect = 0.0;        // ||A~ (Omega_P - d*xi)||
  double budget = 0.0;              // solver_harmonic + gauge_defect

  double da_n1 = 0.0;  // ||grad A||_{L^{n,1}}
  double db_n2 = 0.0;  // ||grad B||_{L^{n,2}}
  RotationDistance dist_so;
  double min_singular = 0.0;       // min over the grid of sigma_min(id + a)
  bool invertibility_held = true;  // min_singular >= 1 - ||a||_inf - 1e-8 when ||a||_inf < 1

  bool probe_ran = false;
  double probe_distance = 0.0;  // x_norm between the two fixed points
  bool probe_agreed = true;
};

/// Failure of the iteration; carries the partial report.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct ABSolution {
  Form A;  // (id + a) P^{-1}
  Form B;
  ABState state;
  SolveReport report;
};

/// Picard iteration of PicardMap from s0 until the x_norm of the step is at
/// most tol. Raises SolverError "outside contraction regime" when the ratio
/// reaches 1 three times in a row or the iterate stops being finite.
ABState iterate_fixed_point(const PicardMap& map, ABState s0, const SolveOptions& options, SolveReport& report);

/// Random state with x_norm total equal to radius: band-limited a and the
/// closed part of a band-limited b.
ABState random_state(const Grid& grid, int m, double radius, std::uint64_t seed);

/// Builds (A, B) from a completed gauge and fills the report.
ABSolution solve_ab(const Form& omega, const GaugePair& gauge, const SolveOptions& options = {});

}  // namespace gaugeflow
