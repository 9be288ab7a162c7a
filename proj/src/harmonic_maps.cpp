#include "gaugeflow/harmonic_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/error.hpp"
#include "gaugeflow/random_forms.hpp"

namespace gaugeflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void normalize_rows(Form& u) {
  std::vector<double> norm2(u.points(), 0.0);
  for (int i = 0; i < u.rows(); ++i) {
    auto ui = u.field(0, i, 0);
    for (std::size_t p = 0; p < ui.size(); ++p) norm2[p] += ui[p] * ui[p];
  }
  for (double& v : norm2) v = 1.0 / std::sqrt(v);
  for (int i = 0; i < u.rows(); ++i) {
    auto ui = u.field(0, i, 0);
    for (std::size_t p = 0; p < ui.size(); ++p) ui[p] *= norm2[p];
  }
}

void require_sphere(const MapField& u, const char* op) {
  if (!u.unit_sphere) throw Error(std::string(op) + ": map is not flagged as sphere-valued");
}

double energy_from_density(const std::vector<double>& density, const Grid& grid) {
  double sum = 0.0;
  for (double v : density) sum += v;
  return 0.5 * sum * grid.cell_volume();
}

}  // namespace

MapField constant_map(const Grid& grid, int m, int axis) {
  if (axis < 0 || axis >= m) throw Error("constant_map: axis out of range");
  MapField u{Form::vector(grid, 0, m), true};
  std::ranges::fill(u.values.field(0, axis, 0), 1.0);
  return u;
}

MapField geodesic_map(const Grid& grid, int m, std::span<const int> wave, std::pair<int, int> axes) {
  const int n = grid.dim();
  if (m < 2) throw Error("geodesic_map: target dimension must be at least 2");
  if (static_cast<int>(wave.size()) != n) throw Error("geodesic_map: wave vector must have n entries");
  auto [ei, ej] = axes;
  if (ei < 0 || ej < 0 || ei >= m || ej >= m || ei == ej) throw Error("geodesic_map: invalid amplitude axes");
  double norm2 = 0.0;
  for (int k : wave) norm2 += double(k) * k;
  if (norm2 == 0.0) throw Error("geodesic_map: wave vector must be nonzero");
  if (4.0 * std::sqrt(norm2) > grid.res()) throw Error("geodesic_map: wave vector not resolved by the grid");

  MapField u{Form::vector(grid, 0, m), true};
  auto ci = u.values.field(0, ei, 0);
  auto cj = u.values.field(0, ej, 0);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    auto idx = grid.index(p);
    // Integer phase arithmetic keeps the argument exact before reduction.
    long phase = 0;
    for (int a = 0; a < n; ++a) phase += static_cast<long>(wave[a]) * idx[a];
    phase %= grid.res();
    const double theta = kTwoPi * static_cast<double>(phase) / grid.res();
    ci[p] = std::cos(theta);
    cj[p] = std::sin(theta);
  }
  return u;
}

MapField perturbed_map(const MapField& base, double delta, std::uint64_t seed, int band) {
  require_sphere(base, "perturbed_map");
  if (delta < 0.0 || delta > 0.2) throw Error("perturbed_map: noise amplitude must lie in [0, 0.2]");
  if (delta == 0.0) return base;
  const Grid& grid = base.grid();
  const int m = base.target_dim();
  if (band < 1 || 4 * band > grid.res()) throw Error("perturbed_map: noise band not resolved by the grid");

  Form noise = random_band_limited(grid, 0, {m, 1}, seed, band);
  // The discrete L2 norm of a polynomial of band < res/2 is exact, so the
  // scaling does not depend on the resolution.
  noise *= delta / l2_norm(noise);

  MapField out = base;
  for (std::size_t p = 0; p < grid.points(); ++p) {
    double dot = 0.0;
    for (int l = 0; l < m; ++l) dot += noise.at(0, l, 0, p) * base.values.at(0, l, 0, p);
    for (int l = 0; l < m; ++l) {
      out.values.at(0, l, 0, p) += noise.at(0, l, 0, p) - dot * base.values.at(0, l, 0, p);
    }
  }
  normalize_rows(out.values);
  return out;
}

std::vector<double> gradient_energy_density(const Form& du) {
  std::vector<double> density(du.points(), 0.0);
  for (std::size_t s = 0; s < du.scalar_fields(); ++s) {
    auto v = du.field(s);
    for (std::size_t p = 0; p < density.size(); ++p) density[p] += v[p] * v[p];
  }
  return density;
}

double dirichlet_energy(const MapField& u) {
  return energy_from_density(gradient_energy_density(exterior_derivative(u.values)), u.grid());
}

Form tension_field(const MapField& u) {
  Form t = laplacian(u.values);
  auto density = gradient_energy_density(exterior_derivative(u.values));
  for (int i = 0; i < u.target_dim(); ++i) {
    auto ti = t.field(0, i, 0);
    auto ui = u.values.field(0, i, 0);
    for (std::size_t p = 0; p < ti.size(); ++p) ti[p] += density[p] * ui[p];
  }
  return t;
}

double tension_residual(const MapField& u) {
  require_sphere(u, "tension_residual");
  return l2_norm(tension_field(u));
}

double tangency_defect(const MapField& u) {
  Form du = exterior_derivative(u.values);
  const int n = u.grid().dim();
  double worst = 0.0;
  for (std::size_t p = 0; p < u.grid().points(); ++p) {
    double norm2 = 0.0;
    for (int a = 0; a < n; ++a) {
      double s = 0.0;
      for (int j = 0; j < u.target_dim(); ++j) s += u.values.at(0, j, 0, p) * du.at(a, j, 0, p);
      norm2 += s * s;
    }
    worst = std::max(worst, std::sqrt(norm2));
  }
  return worst;
}

namespace {

// density is |grad u|^2 of the current map.
MapField flow_step(const MapField& u, const std::vector<double>& density, double tau) {
  Form rhs = u.values;
  for (int i = 0; i < u.target_dim(); ++i) {
    auto r = rhs.field(0, i, 0);
    auto ui = u.values.field(0, i, 0);
    for (std::size_t p = 0; p < r.size(); ++p) r[p] += tau * density[p] * ui[p];
  }
  MapField next{solve_shifted_laplacian(rhs, tau), true};
  normalize_rows(next.values);
  return next;
}

}  // namespace

MapField heat_flow_relax(const MapField& initial, double tau, int steps, HeatFlowTrace* trace) {
  require_sphere(initial, "heat_flow_relax");
  const double h = initial.grid().spacing();
  if (!(tau > 0.0) || tau > 0.25 * h * h * (1.0 + 1e-12)) {
    throw Error("heat_flow_relax: step must lie in (0, h^2/4]");
  }
  if (steps < 0) throw Error("heat_flow_relax: negative step count");
  constexpr int kMaxHalvings = 20;
  // Energy comparisons allow rounding-level slack so exact fixed points do
  // not trigger spurious halvings.
  constexpr double kSlack = 1e-12;

  MapField u = initial;
  // The gradient of an accepted candidate feeds the next step.
  auto density = gradient_energy_density(exterior_derivative(u.values));
  double energy = energy_from_density(density, u.grid());
  if (trace) trace->energies.assign(1, energy);
  for (int step = 0; step < steps; ++step) {
    double trial_tau = tau;
    bool accepted = false;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt) {
      MapField candidate = flow_step(u, density, trial_tau);
      auto candidate_density = gradient_energy_density(exterior_derivative(candidate.values));
      const double candidate_energy = energy_from_density(candidate_density, u.grid());
      if (candidate_energy <= energy * (1.0 + kSlack)) {
        u = std::move(candidate);
        density = std::move(candidate_density);
        energy = candidate_energy;
        accepted = true;
        break;
      }
      trial_tau *= 0.5;
      if (trace) ++trace->halvings;
    }
    if (!accepted) throw Error("heat_flow_relax: flow stagnated at step " + std::to_string(step));
    if (trace) trace->energies.push_back(energy);
  }
  return u;
}

}  // namespace gaugeflow
