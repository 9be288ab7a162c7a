#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "gaugeflow/form.hpp"
#include "gaugeflow/harmonic_maps.hpp"

namespace gaugeflow {

/// Orthonormal frame {nu_I} of the normal bundle of a target N in R^m,
/// given as callbacks on target points y. Callbacks must be reentrant.
struct NormalFrame {
  int codimension = 0;
  /// nu_I(y), I = 0 .. codimension-1.
  std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)> evaluate;
  /// Jacobians J_I(y) with J_I(l, j) = d nu_I^l / d y_j.
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> jacobian;
};

/// Unit normal nu(y) = y of S^{m-1}.
NormalFrame sphere_frame(int m);

/// Omega^i_j = u^i du^j - u^j du^i for a sphere-valued map.
Form omega_sphere(const MapField& u);

struct FrameConnection {
  Form omega;
  double antisymmetry_defect = 0.0;  // before explicit antisymmetrization
  double growth_constant = 0.0;      // sup |Omega| / |grad u| where grad u != 0
};

/// Omega^i_j = sum_{l,I} (nu_I^i(u) d_j nu_I^l(u) - nu_I^j(u) d_i nu_I^l(u)) du^l.
FrameConnection omega_from_frame(const MapField& u, const NormalFrame& frame);

/// Pointwise contraction (Omega . grad u)^i = sum_j <Omega^i_j, du^j>.
Form contract(const Form& omega, const Form& du);

/// || Laplacian(u) + Omega . grad u ||_{L2}.
double riviere_residual(const MapField& u, const Form& omega);

/// Connection built directly from random band-limited potentials:
///   Omega = d* xi0 + d eta0,
/// with xi0 = d alpha an exact antisymmetric 2-form and eta0 an antisymmetric
/// 0-form whose part has L2 size gauge_fraction times that of d* xi0. The sum
/// is scaled so that ||Omega||_{L^{n,2}} = epsilon; xi0 and eta0 carry the
/// same scale. gauge_fraction = 0 gives a coexact (already gauged) Omega.
struct SyntheticConnection {
  Form omega;
  Form xi0;
  Form eta0;
};

SyntheticConnection synthetic_connection(const Grid& grid, int m, double epsilon, double gauge_fraction,
                                         std::uint64_t seed, int band = 2);

}  // namespace gaugeflow
