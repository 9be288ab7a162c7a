#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gaugeflow/form.hpp"

namespace gaugeflow {

/// An R^m-valued map on the torus, stored as a vector-valued 0-form.
struct MapField {
  Form values;
  bool unit_sphere = false;

  const Grid& grid() const { return values.grid(); }
  int target_dim() const { return values.rows(); }
};

/// Constant map equal to the basis vector e_axis.
MapField constant_map(const Grid& grid, int m, int axis = 0);

/// u(x) = cos(2 pi kappa.x) e_i + sin(2 pi kappa.x) e_j, a great circle composed
/// with a linear phase; an exact harmonic map. Requires 4 |kappa| <= res.
MapField geodesic_map(const Grid& grid, int m, std::span<const int> wave, std::pair<int, int> axes);

/// Adds tangent noise of L2 size delta, band-limited to |kappa|_inf <= band, to
/// a sphere map and renormalizes. The noise is a fixed trigonometric
/// polynomial determined by the seed, so the same seed gives the same
/// continuum data at every resolution.
MapField perturbed_map(const MapField& base, double delta, std::uint64_t seed, int band = 2);

struct HeatFlowTrace {
  std::vector<double> energies;  // energy after each accepted step, entry 0 is the start
  int halvings = 0;
};

/// Semi-implicit sphere heat flow
///   (1 - tau Laplacian) v = u + tau |grad u|^2 u,  u <- v / |v|.
/// A step that raises the Dirichlet energy is retried with half the step, at
/// most 20 times; requires tau <= h^2 / 4.
MapField heat_flow_relax(const MapField& initial, double tau, int steps, HeatFlowTrace* trace = nullptr);

/// Dirichlet energy 1/2 int |grad u|^2.
double dirichlet_energy(const MapField& u);

/// Pointwise |grad u|^2 as a scalar field.
std::vector<double> gradient_energy_density(const Form& du);

/// Laplacian(u) + |grad u|^2 u.
Form tension_field(const MapField& u);

/// L2 norm of the tension field; zero exactly for discretely harmonic maps.
double tension_residual(const MapField& u);

/// Largest pointwise |sum_j u^j grad u^j|.
double tangency_defect(const MapField& u);

}  // namespace gaugeflow
