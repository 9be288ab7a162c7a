#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/error.hpp"
#include "gaugeflow/harmonic_maps.hpp"
#include "oracles.hpp"

using namespace gaugeflow;

namespace {

double max_unit_defect(const MapField& u) {
  double worst = 0.0;
  for (std::size_t p = 0; p < u.grid().points(); ++p) {
    double s = 0.0;
    for (int i = 0; i < u.target_dim(); ++i) s += u.values.at(0, i, 0, p) * u.values.at(0, i, 0, p);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

}  // namespace

TEST_CASE("geodesic map: closed form, unit length, harmonic") {
  Grid g(3, 32);
  const int wave[] = {1, 0, 0};
  MapField u = geodesic_map(g, 3, wave, {0, 1});
  double err = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    const double t = oracle::kTwoPi * g.coordinate(p, 0);
    err = std::max({err, std::abs(u.values.at(0, 0, 0, p) - std::cos(t)), std::abs(u.values.at(0, 1, 0, p) - std::sin(t)),
                    std::abs(u.values.at(0, 2, 0, p))});
  }
  CHECK(err < 1e-15);
  CHECK(max_unit_defect(u) <= 1e-12);
  CHECK(tension_residual(u) <= 1e-8);
  CHECK(tangency_defect(u) <= 1e-8);

  // tension stays at roundoff for a steeper wave and a finer grid
  const int steep[] = {2, 1, -1};
  CHECK(tension_residual(geodesic_map(Grid(3, 16), 3, steep, {2, 0})) <= 1e-8);
  CHECK(tension_residual(geodesic_map(Grid(3, 64), 4, wave, {1, 3})) <= 1e-8);
}

TEST_CASE("geodesic map preconditions") {
  Grid g(2, 16);
  const int zero[] = {0, 0};
  const int fast[] = {5, 0};
  const int ok[] = {1, 1};
  CHECK_THROWS_AS(geodesic_map(g, 3, zero, {0, 1}), Error);
  CHECK_THROWS_AS(geodesic_map(g, 3, fast, {0, 1}), Error);
  CHECK_THROWS_AS(geodesic_map(g, 1, ok, {0, 1}), Error);
  CHECK_THROWS_AS(geodesic_map(g, 3, ok, {1, 1}), Error);
}

TEST_CASE("constant map is a fixed point") {
  Grid g(3, 16);
  MapField c = constant_map(g, 3, 2);
  CHECK(tension_residual(c) == 0.0);
  CHECK(dirichlet_energy(c) == 0.0);
  MapField flowed = heat_flow_relax(c, 0.25 * g.spacing() * g.spacing(), 5);
  CHECK(oracle::bitwise_equal(flowed.values, c.values));
}

TEST_CASE("perturbed map: identity at delta 0, deterministic, energy grows with delta") {
  Grid g(3, 32);
  MapField base = constant_map(g, 3, 0);
  CHECK(oracle::max_abs_diff(perturbed_map(base, 0.0, 4).values, base.values) == 0.0);
  MapField a = perturbed_map(base, 0.05, 4);
  MapField b = perturbed_map(base, 0.05, 4);
  CHECK(oracle::bitwise_equal(a.values, b.values));
  CHECK(max_unit_defect(a) <= 1e-12);
  CHECK(tangency_defect(a) <= 1e-8);

  double prev = 0.0;
  for (double delta : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const double grad = std::sqrt(2.0 * dirichlet_energy(perturbed_map(base, delta, 4)));
    CHECK(grad > prev);
    CHECK(grad <= 20.0 * delta);  // band 2 noise: |grad| <= 2 pi sqrt(2) * 2 * delta
    prev = grad;
  }
  CHECK_THROWS_AS(perturbed_map(base, 0.3, 4), Error);
}

TEST_CASE("heat flow leaves a geodesic map in place") {
  Grid g(2, 32);
  const int wave[] = {1, 1};
  MapField u = geodesic_map(g, 3, wave, {0, 2});
  const double t0 = tension_residual(u);
  MapField v = heat_flow_relax(u, 0.25 * g.spacing() * g.spacing(), 10);
  CHECK(oracle::max_abs_diff(v.values, u.values) <= 1e-6);
  CHECK(tension_residual(v) <= std::max(t0, 1e-10));
}

TEST_CASE("heat flow: energy nonincreasing per step and tension reduced 10x in 200 steps") {
  Grid g(3, 16);
  MapField u0 = perturbed_map(constant_map(g, 3, 0), 0.05, 1);
  HeatFlowTrace trace;
  MapField u = heat_flow_relax(u0, 0.25 * g.spacing() * g.spacing(), 200, &trace);
  REQUIRE(trace.energies.size() == 201);
  for (std::size_t k = 1; k < trace.energies.size(); ++k) CHECK(trace.energies[k] <= trace.energies[k - 1] * (1 + 1e-12));
  CHECK(tension_residual(u) * 10.0 <= tension_residual(u0));
  CHECK(max_unit_defect(u) <= 1e-12);
  CHECK(tension_residual(u) > 0.0);
}

TEST_CASE("heat flow step guard and sphere requirement") {
  Grid g(2, 16);
  MapField u = perturbed_map(constant_map(g, 3, 0), 0.05, 1);
  CHECK_THROWS_AS(heat_flow_relax(u, g.spacing() * g.spacing(), 1), Error);
  CHECK_THROWS_AS(heat_flow_relax(u, -1.0, 1), Error);
  MapField plain{u.values, false};
  CHECK_THROWS_AS(tension_residual(plain), Error);
}

TEST_CASE("tension decreases under the flow for a larger perturbation") {
  Grid g(2, 32);
  MapField u = perturbed_map(constant_map(g, 3, 1), 0.1, 3);
  const double tau = 0.25 * g.spacing() * g.spacing();
  double prev = tension_residual(u);
  CHECK(prev > 0.0);
  for (int chunk = 0; chunk < 4; ++chunk) {
    u = heat_flow_relax(u, tau, 50);
    const double cur = tension_residual(u);
    CHECK(cur < prev);
    prev = cur;
  }
}
