#include "gaugeflow/verification.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/connection.hpp"
#include "gaugeflow/error.hpp"
#include "gaugeflow/lorentz.hpp"
#include "gaugeflow/riviere_solver.hpp"

namespace gaugeflow {

namespace {

void check_pair(const Form& A, const Form& B, const MapField& u) {
  if (A.degree() != 0 || B.degree() != 2) throw Error("conservation_residual: A must be a 0-form and B a 2-form");
  if (A.rows() != u.target_dim() || B.rows() != u.target_dim() || A.grid() != u.grid() || B.grid() != u.grid()) {
    throw Error("conservation_residual: size mismatch");
  }
}

// Pointwise (matrix field) * (vector field) for one component of each.
void multiply_add(const Form& M, int mcomp, const Form& v, int vcomp, double sign, std::vector<double>& out, int row) {
  for (int j = 0; j < M.cols(); ++j) {
    auto mij = M.field(mcomp, row, j);
    auto vj = v.field(vcomp, j, 0);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += sign * mij[p] * vj[p];
  }
}

// Top-degree form to its single coefficient as a 0-form.
Form top_coefficient(const Form& top) { return hodge_star(top); }

// Relative above unit scale, absolute below it, so a vanishing dJ does not
// inflate roundoff.
double relative(double diff, double scale) { return diff / std::max(scale, 1.0); }

}  // namespace

Form conserved_current(const Form& A, const Form& B, const MapField& u) {
  check_pair(A, B, u);
  const int n = u.grid().dim();
  Form du = exterior_derivative(u.values);
  Form current = hodge_star(matrix_act_vector(A, du));
  Form coupling = matrix_act_vector(hodge_star(B), du);
  if (n % 2 == 0) coupling *= -1.0;  // (-1)^{n-1}
  current += coupling;
  return current;
}

Form coordinate_divergence(const Form& A, const Form& B, const MapField& u) {
  check_pair(A, B, u);
  const Grid& grid = u.grid();
  const int n = grid.dim();
  const int m = u.target_dim();
  Form du = exterior_derivative(u.values);
  Form out = Form::vector(grid, 0, m);
  for (int a = 0; a < n; ++a) {
    // Flux along axis a: A d_a u - sum_b B_{ab} d_b u.
    Form flux = Form::vector(grid, 0, m);
    for (int i = 0; i < m; ++i) {
      std::vector<double> acc(grid.points(), 0.0);
      multiply_add(A, 0, du, a, 1.0, acc, i);
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const IndexMask mask = (1u << a) | (1u << b);
        const double orient = a < b ? 1.0 : -1.0;
        multiply_add(B, component_index(n, mask), du, b, -orient, acc, i);
      }
      std::ranges::copy(acc, flux.field(0, i, 0).begin());
    }
    out += partial_derivative(flux, a);
  }
  return out;
}

ResidualReport conservation_residual(const Form& A, const Form& B, const MapField& u) {
  Form density = top_coefficient(exterior_derivative(conserved_current(A, B, u)));
  Form coordinate = coordinate_divergence(A, B, u);
  ResidualReport report;
  report.l2 = l2_norm(density);
  report.sup = sup_norm(density);
  report.coordinate_l2 = l2_norm(coordinate);
  report.path_disagreement = relative(l2_norm(density - coordinate), std::max(report.l2, report.coordinate_l2));
  return report;
}

ResidualReport conservation_residual(const Form& A, const Form& B, const MapField& u, const Form& omega) {
  ResidualReport report = conservation_residual(A, B, u);
  Form density = top_coefficient(exterior_derivative(conserved_current(A, B, u)));
  Form du = exterior_derivative(u.values);
  Form tension = wedge(A, laplacian(u.values) + contract(omega, du));
  Form r = ab_residual_form(A, B, omega);
  Form r_mean = harmonic_part(r);
  Form harmonic = contract(r_mean, du);
  Form solver = contract(r - r_mean, du);
  report.budget.tension = l2_norm(tension);
  report.budget.harmonic = l2_norm(harmonic);
  report.budget.solver = l2_norm(solver);
  report.budget.discretization = l2_norm(density - tension - harmonic - solver);
  return report;
}

ResidualReport sphere_divergence_residual(const MapField& u) {
  Form div = codifferential(omega_sphere(u));
  ResidualReport report;
  report.l2 = l2_norm(div);
  report.sup = sup_norm(div);
  return report;
}

TheoremBounds theorem_bounds(const Form& A, const Form& B, const Form& omega) {
  const double n = A.grid().dim();
  TheoremBounds t;
  RotationDistance dist = distance_to_rotations(A);
  t.dist_so = dist.sup;
  t.nonpositive_det = dist.nonpositive_det;
  t.da_n1 = gradient_lorentz_norm(A, n, 1.0);
  t.db_n2 = gradient_lorentz_norm(B, n, 2.0);
  t.omega_n2 = lorentz_norm(omega, n, 2.0);
  const double num = t.numerator();
  if (t.omega_n2 > 0.0) {
    t.ratio = num / t.omega_n2;
  } else if (num == 0.0) {
    t.ratio = std::numeric_limits<double>::quiet_NaN();
    t.ratio_note = "undefined at 0/0";
  } else {
    t.ratio = std::numeric_limits<double>::infinity();
    t.ratio_note = "unbounded: zero connection with nonzero output";
  }
  if (t.nonpositive_det > 0) {
    t.ratio_note += (t.ratio_note.empty() ? "" : "; ") + std::to_string(t.nonpositive_det) +
                    " points with det A <= 0 excluded from dist";
  }
  return t;
}

OrderEstimate estimate_order(const std::vector<double>& spacing, const std::vector<double>& residual, double floor) {
  if (spacing.size() != residual.size() || spacing.size() < 3) {
    throw Error("estimate_order: need at least three (h, residual) pairs");
  }
  OrderEstimate est;
  bool all_floor = true;
  for (double r : residual) all_floor = all_floor && std::abs(r) <= floor;
  if (all_floor) {
    est.at_floor = true;
    return est;
  }
  std::vector<double> x, y;
  for (std::size_t k = 0; k + 1 < residual.size(); ++k) {
    const double diff = std::abs(residual[k] - residual[k + 1]);
    if (diff <= 0.0) continue;
    x.push_back(std::log2(spacing[k]));
    y.push_back(std::log2(diff));
  }
  if (x.size() < 2) {
    est.at_floor = true;
    return est;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  est.order = sxy / sxx;
  return est;
}

void check_ladder(const std::vector<int>& resolutions) {
  if (resolutions.size() < 3) throw Error("convergence_study: need at least three resolutions");
  for (std::size_t k = 1; k < resolutions.size(); ++k) {
    if (resolutions[k] != 2 * resolutions[k - 1]) {
      throw Error("convergence_study: non-doubling ladder at " + std::to_string(resolutions[k - 1]) + " -> " +
                  std::to_string(resolutions[k]));
    }
  }
}

StudyResult convergence_study(const std::vector<int>& resolutions, const std::function<double(int)>& residual_at,
                              double floor) {
  check_ladder(resolutions);
  StudyResult result;
  std::vector<double> h, r;
  for (int res : resolutions) {
    const double value = residual_at(res);
    result.rows.push_back({res, 1.0 / res, value});
    h.push_back(1.0 / res);
    r.push_back(value);
  }
  result.estimate = estimate_order(h, r, floor);
  return result;
}

}  // namespace gaugeflow
