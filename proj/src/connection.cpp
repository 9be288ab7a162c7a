#include "gaugeflow/connection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/error.hpp"
#include "gaugeflow/lorentz.hpp"
#include "gaugeflow/random_forms.hpp"

namespace gaugeflow {

NormalFrame sphere_frame(int m) {
  NormalFrame frame;
  frame.codimension = 1;
  frame.evaluate = [](const Eigen::VectorXd& y) { return std::vector<Eigen::VectorXd>{y}; };
  frame.jacobian = [m](const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(m, m)};
  };
  return frame;
}

Form omega_sphere(const MapField& u) {
  if (!u.unit_sphere) throw Error("omega_sphere: map is not flagged as sphere-valued");
  const int m = u.target_dim();
  const int n = u.grid().dim();
  Form du = exterior_derivative(u.values);
  Form omega = Form::matrix(u.grid(), 1, m);
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < m; ++i) {
      auto ui = u.values.field(0, i, 0);
      auto dui = du.field(a, i, 0);
      for (int j = i + 1; j < m; ++j) {
        auto uj = u.values.field(0, j, 0);
        auto duj = du.field(a, j, 0);
        auto upper = omega.field(a, i, j);
        auto lower = omega.field(a, j, i);
        for (std::size_t p = 0; p < upper.size(); ++p) {
          upper[p] = ui[p] * duj[p] - uj[p] * dui[p];
          lower[p] = -upper[p];
        }
      }
    }
  }
  omega.mark_skew(true);
  return omega;
}

FrameConnection omega_from_frame(const MapField& u, const NormalFrame& frame) {
  const Grid& grid = u.grid();
  const int m = u.target_dim();
  const int n = grid.dim();
  Form du = exterior_derivative(u.values);
  FrameConnection out{Form::matrix(grid, 1, m)};

  Eigen::VectorXd y(m);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    for (int i = 0; i < m; ++i) y[i] = u.values.at(0, i, 0, p);
    std::vector<Eigen::VectorXd> nu;
    std::vector<Eigen::MatrixXd> jac;
    try {
      nu = frame.evaluate(y);
      jac = frame.jacobian(y);
    } catch (const std::exception& e) {
      auto idx = grid.index(p);
      std::string where;
      for (int a = 0; a < n; ++a) where += (a ? "," : "") + std::to_string(idx[a]);
      throw Error("omega_from_frame: frame evaluation failed at grid point (" + where + "): " + e.what());
    }
    if (static_cast<int>(nu.size()) != frame.codimension || jac.size() != nu.size()) {
      throw Error("omega_from_frame: frame returned the wrong number of normals");
    }
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          double value = 0.0;
          for (std::size_t I = 0; I < nu.size(); ++I) {
            for (int l = 0; l < m; ++l) {
              value += (nu[I][i] * jac[I](l, j) - nu[I][j] * jac[I](l, i)) * du.at(a, l, 0, p);
            }
          }
          out.omega.at(a, i, j, p) = value;
        }
      }
    }
  }
  out.antisymmetry_defect = out.omega.antisymmetrize();

  auto omega_mag = pointwise_norm(out.omega);
  auto du_mag = pointwise_norm(du);
  const double floor = 1e-12 * std::max(1.0, *std::ranges::max_element(du_mag));
  for (std::size_t p = 0; p < omega_mag.size(); ++p) {
    if (du_mag[p] > floor) out.growth_constant = std::max(out.growth_constant, omega_mag[p] / du_mag[p]);
  }
  return out;
}

Form contract(const Form& omega, const Form& du) {
  if (omega.degree() != 1 || du.degree() != 1) throw Error("contract: both arguments must be 1-forms");
  if (omega.cols() != du.rows() || du.cols() != 1) throw Error("contract: size mismatch");
  const int m = omega.rows();
  Form out = Form::vector(omega.grid(), 0, m);
  for (int i = 0; i < m; ++i) {
    auto dst = out.field(0, i, 0);
    for (int a = 0; a < omega.components(); ++a) {
      for (int j = 0; j < omega.cols(); ++j) {
        auto w = omega.field(a, i, j);
        auto d = du.field(a, j, 0);
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += w[p] * d[p];
      }
    }
  }
  return out;
}

double riviere_residual(const MapField& u, const Form& omega) {
  if (omega.degree() != 1 || omega.rows() != u.target_dim()) throw Error("riviere_residual: size mismatch");
  Form r = laplacian(u.values) + contract(omega, exterior_derivative(u.values));
  return l2_norm(r);
}

SyntheticConnection synthetic_connection(const Grid& grid, int m, double epsilon, double gauge_fraction,
                                         std::uint64_t seed, int band) {
  if (!(epsilon >= 0.0)) throw Error("synthetic_connection: epsilon must be nonnegative");
  if (!(gauge_fraction >= 0.0)) throw Error("synthetic_connection: gauge fraction must be nonnegative");
  Form alpha = random_band_limited(grid, 1, {m, m}, seed, band);
  alpha.antisymmetrize();
  SyntheticConnection out;
  out.xi0 = exterior_derivative(alpha);
  out.omega = codifferential(out.xi0);
  out.eta0 = random_band_limited(grid, 0, {m, m}, seed + 1, band);
  out.eta0.antisymmetrize();
  const double coexact = l2_norm(out.omega);
  Form exact = exterior_derivative(out.eta0);
  const double eta_scale = gauge_fraction * coexact / l2_norm(exact);
  out.eta0 *= eta_scale;
  exact *= eta_scale;
  out.omega += exact;

  const double size = lorentz_norm(out.omega, grid.dim(), 2.0);
  const double scale = epsilon / size;
  out.omega *= scale;
  out.xi0 *= scale;
  out.eta0 *= scale;
  out.omega.antisymmetrize();
  out.xi0.antisymmetrize();
  return out;
}

}  // namespace gaugeflow
