#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gaugeflow/form.hpp"
#include "gaugeflow/harmonic_maps.hpp"

namespace gaugeflow {

/// Split of a conservation residual along
///   dJ = A (Lap u + Omega.grad u) + R.grad u + (product-rule aliasing),
/// with R = dA - A Omega + d*B. By the triangle inequality ||dJ|| <= total().
struct BudgetTerms {
  double tension = 0.0;         // ||A (Lap u + Omega.grad u)||
  double harmonic = 0.0;        // ||(mean R).grad u||, the torus constant part
  double solver = 0.0;          // ||(R - mean R).grad u||
  double discretization = 0.0;  // ||dJ - both terms above||

  double total() const { return tension + harmonic + solver + discretization; }
};

struct ResidualReport {
  double l2 = 0.0;
  double sup = 0.0;
  BudgetTerms budget;
  // Forms path vs coordinate path, ||difference|| / max(||dJ||, ||coordinate||, 1).
  double coordinate_l2 = 0.0;
  double path_disagreement = 0.0;
  std::optional<double> order;
  bool at_floor = false;
};

/// J = *(A du) + (-1)^{n-1} (*B) ^ du, an R^m-valued (n-1)-form.
Form conserved_current(const Form& A, const Form& B, const MapField& u);

/// Coordinate form of dJ as a vector 0-form:
///   d_a (A d_a u) - d_a (B_{ab} d_b u),
/// with B_{ab} the coefficient of dx_a ^ dx_b extended antisymmetrically.
Form coordinate_divergence(const Form& A, const Form& B, const MapField& u);

/// ||dJ|| with the coordinate cross-check; budget terms left at zero.
ResidualReport conservation_residual(const Form& A, const Form& B, const MapField& u);

/// conservation_residual plus the budget split of dJ for a given connection.
ResidualReport conservation_residual(const Form& A, const Form& B, const MapField& u, const Form& omega);

/// Norms of d*(u^i du^j - u^j du^i) over all i < j.
ResidualReport sphere_divergence_residual(const MapField& u);

struct TheoremBounds {
  double dist_so = 0.0;  // sup over det > 0 points of |A - polar(A)|
  int nonpositive_det = 0;
  double da_n1 = 0.0;
  double db_n2 = 0.0;
  double omega_n2 = 0.0;
  double ratio = 0.0;  // NaN when 0/0
  std::string ratio_note;

  double numerator() const { return dist_so + da_n1 + db_n2; }
};

TheoremBounds theorem_bounds(const Form& A, const Form& B, const Form& omega);

struct OrderEstimate {
  std::optional<double> order;
  bool at_floor = false;
};

/// Observed order of a residual sequence on a doubling ladder. Every residual
/// at or below floor reports "floor". Otherwise the order is the least-squares
/// slope of log2 |r_k - r_{k+1}| against log2 h_k, so a limit value that does
/// not vanish with h (such as a fixed tension) does not mask the rate.
OrderEstimate estimate_order(const std::vector<double>& spacing, const std::vector<double>& residual, double floor);

struct StudyRow {
  int res = 0;
  double h = 0.0;
  double residual = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  OrderEstimate estimate;
};

/// Runs residual_at(res) for every resolution of a doubling ladder (at least
/// three entries) and estimates the order.
StudyResult convergence_study(const std::vector<int>& resolutions, const std::function<double(int)>& residual_at,
                              double floor = 1e-10);

/// Throws unless resolutions has at least three entries, each double the previous.
void check_ladder(const std::vector<int>& resolutions);

}  // namespace gaugeflow
