#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/connection.hpp"
#include "gaugeflow/random_forms.hpp"
#include "gaugeflow/riviere_solver.hpp"
#include "oracles.hpp"

using namespace gaugeflow;

namespace {

// P = rotation by 2 pi (x1 + x2) in the (0, 1) plane: band 1, so products
// with band-2 data stay alias free on the grids below.
Form linear_phase_rotation(const Grid& g, int m) {
  Form P = Form::identity(g, m);
  for (std::size_t p = 0; p < g.points(); ++p) {
    const double t = oracle::kTwoPi * (g.coordinate(p, 0) + g.coordinate(p, 1));
    P.at(0, 0, 0, p) = std::cos(t);
    P.at(0, 0, 1, p) = -std::sin(t);
    P.at(0, 1, 0, p) = std::sin(t);
    P.at(0, 1, 1, p) = std::cos(t);
  }
  return P;
}

GaugePair random_gauge(const Grid& g, int m, std::uint64_t seed) {
  GaugePair gauge;
  gauge.P = linear_phase_rotation(g, m);
  gauge.xi = random_band_limited(g, 2, {m, m}, seed, 2);
  gauge.xi.antisymmetrize();
  return gauge;
}

GaugePair gauge_for(const Form& omega) { return extract_xi(minimize_gauge(omega), omega); }

Form plus_identity(Form a) {
  for (int i = 0; i < a.rows(); ++i)
    for (double& v : a.field(0, i, i)) v += 1.0;
  return a;
}

}  // namespace

TEST_CASE("right-hand side constants reproduce the direct forms") {
  for (int n : {2, 3, 4}) {
    CAPTURE(n);
    Grid g(n, n == 4 ? 16 : 32);
    const int m = 3;
    GaugePair gauge = random_gauge(g, m, 40 + n);
    PicardMap map(gauge);
    CHECK(map.constants().version == "ab-rhs-v1/n" + std::to_string(n));

    ABState s{random_band_limited(g, 0, {m, m}, 7, 2), project_closed(random_band_limited(g, 2, {m, m}, 8, 2))};
    const Form d_star_xi = codifferential(gauge.xi);
    const Form Pt = transpose_values(gauge.P);

    // -Lap a' = d*(a d*xi) - d*((d*b) P)
    Form direct_a = codifferential(wedge(s.a_hat, d_star_xi)) - codifferential(wedge(codifferential(s.b), gauge.P));
    // -Lap b' = da ^ dP^T + d((a + id) d*xi P^T)
    Form direct_b = wedge(exterior_derivative(s.a_hat), exterior_derivative(Pt)) +
                    exterior_derivative(wedge(wedge(plus_identity(s.a_hat), d_star_xi), Pt));

    CHECK(oracle::max_abs_diff(map.rhs_a(s), direct_a) <= 1e-10 * oracle::max_abs(direct_a));
    CHECK(oracle::max_abs_diff(map.rhs_b(s), direct_b) <= 1e-10 * oracle::max_abs(direct_b));

    // a flipped coupling sign is visible to the same oracle
    RhsConstants wrong = map.constants();
    wrong.a_b = -wrong.a_b;
    CHECK(oracle::max_abs_diff(PicardMap(gauge, wrong).rhs_a(s), direct_a) > 1e-3 * oracle::max_abs(direct_a));
  }
}

TEST_CASE("x norm of simple states") {
  Grid g(3, 16);
  ABState zero = zero_state(g, 3);
  CHECK(x_norm(zero).total == 0.0);

  ABState c = zero_state(g, 3);
  std::ranges::fill(c.a_hat.field(0, 1, 2), -0.25);
  XNorm x = x_norm(c);
  CHECK(x.sup_a == 0.25);
  CHECK(x.da_n2 == 0.0);
  CHECK(x.total == 0.25);

  ABState r = random_state(g, 3, 0.5, 3);
  CHECK(x_norm(r).total == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(l2_norm(exterior_derivative(r.b)) <= 1e-12);
}

TEST_CASE("trivial gauge gives the zero map") {
  Grid g(3, 16);
  GaugePair gauge{Form::identity(g, 3), Form::matrix(g, 2, 3), {}};
  gauge.xi.mark_skew(true);
  PicardMap map(gauge);
  ABState out = map(random_state(g, 3, 1.0, 5));
  CHECK(oracle::max_abs(out.a_hat) == 0.0);
  CHECK(oracle::max_abs(out.b) == 0.0);
}

TEST_CASE("one step from zero solves the B Poisson problem") {
  Grid g(3, 32);
  GaugePair gauge = random_gauge(g, 3, 12);
  PicardMap map(gauge);
  ABState zero = zero_state(g, 3);
  ABState next = map(zero);
  CHECK(oracle::max_abs(next.a_hat) == 0.0);
  Form rhs = map.rhs_b(zero);
  Form lap = laplacian(next.b);
  lap *= -1.0;
  CHECK(oracle::max_abs_diff(lap, rhs) <= 1e-10 * oracle::max_abs(rhs));
}

TEST_CASE("the map contracts on random pairs for a small connection") {
  Grid g(3, 32);
  SyntheticConnection s = synthetic_connection(g, 3, 1e-2, 1.0, 21);
  PicardMap map(gauge_for(s.omega));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ABState x = random_state(g, 3, 1.0, 100 + seed);
    ABState y = random_state(g, 3, 0.5, 200 + seed);
    const double before = x_norm(x - y).total;
    const double after = x_norm(map(x) - map(y)).total;
    CHECK(after < 0.5 * before);
  }
}

TEST_CASE("zero connection gives A = id and B = 0") {
  Grid g(3, 16);
  Form zero = Form::matrix(g, 1, 3);
  ABSolution sol = solve_ab(zero, gauge_for(zero));
  CHECK(oracle::bitwise_equal(sol.A, Form::identity(g, 3)));
  CHECK(oracle::max_abs(sol.B) == 0.0);
  CHECK(sol.report.residual.l2 == 0.0);
  CHECK(sol.report.iterations == 1);
}

TEST_CASE("solve_ab on a synthetic connection") {
  Grid g(3, 32);
  SyntheticConnection s = synthetic_connection(g, 3, 1e-2, 1.0, 3);
  ABSolution sol = solve_ab(s.omega, gauge_for(s.omega));
  const SolveReport& r = sol.report;
  CHECK(r.constants_version == "ab-rhs-v1/n3");
  CHECK(r.residual.l2 <= 1e-6 + r.budget);
  CHECK(r.kappa_bar < 0.5);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].difference.total <= 0.5 * r.trace[k - 1].difference.total);
  CHECK(r.trace.back().difference.total <= 1e-8);
  CHECK(r.probe_ran);
  CHECK(r.probe_agreed);
  CHECK(r.probe_distance <= 1e-7);
  CHECK(r.invertibility_held);
  CHECK(r.min_singular > 0.9);
  CHECK(r.dist_so.nonpositive_det == 0);
  CHECK(r.dist_so.sup < 0.1);
  CHECK(std::isfinite(r.da_n1));
  CHECK(std::isfinite(r.db_n2));

  // the residual of a perturbed A grows linearly with the perturbation
  Form bump = random_band_limited(g, 0, {3, 3}, 77, 2);
  const double base = r.residual.l2;
  Form a1 = sol.A + 1e-3 * bump;
  Form a2 = sol.A + 2e-3 * bump;
  const double r1 = ab_residual(a1, sol.B, s.omega).l2 - base;
  const double r2 = ab_residual(a2, sol.B, s.omega).l2 - base;
  CHECK(r1 > 0.0);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("a wrong coupling sign leaves a large residual") {
  Grid g(3, 32);
  SyntheticConnection s = synthetic_connection(g, 3, 1e-2, 1.0, 3);
  GaugePair gauge = gauge_for(s.omega);
  RhsConstants wrong = RhsConstants::for_dimension(3);
  wrong.b_xi = -wrong.b_xi;
  PicardMap map(gauge, wrong);
  SolveReport report;
  ABState state = iterate_fixed_point(map, zero_state(g, 3), {}, report);
  Form A = wedge(plus_identity(state.a_hat), map.Pt());
  const double right = solve_ab(s.omega, gauge).report.residual.l2;
  CHECK(ab_residual(A, state.b, s.omega).l2 > 100.0 * std::max(right, 1e-8));
}

TEST_CASE("amplified constants leave the contraction regime") {
  Grid g(3, 16);
  SyntheticConnection s = synthetic_connection(g, 3, 1e-2, 1.0, 3);
  RhsConstants amplified = RhsConstants::for_dimension(3);
  for (double* c : {&amplified.a_xi, &amplified.a_b, &amplified.b_p, &amplified.b_xi}) *c *= 1e5;
  PicardMap map(gauge_for(s.omega), amplified);
  SolveReport report;
  try {
    iterate_fixed_point(map, zero_state(g, 3), {}, report);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("outside contraction regime") != std::string::npos);
    CHECK(e.report().trace.size() >= 3);
  }
}

TEST_CASE("distance to rotations") {
  Grid g(2, 8);
  CHECK(distance_to_rotations(Form::identity(g, 3)).sup == 0.0);
  CHECK(distance_to_rotations(linear_phase_rotation(g, 3)).sup <= 1e-14);
  Form scaled = 2.0 * Form::identity(g, 3);
  CHECK(distance_to_rotations(scaled).sup == doctest::Approx(std::sqrt(3.0)));
  Form flipped = Form::identity(g, 3);
  std::ranges::fill(flipped.field(0, 0, 0), -1.0);
  RotationDistance d = distance_to_rotations(flipped);
  CHECK(d.nonpositive_det == static_cast<int>(g.points()));
  CHECK(d.sup == 0.0);
}
