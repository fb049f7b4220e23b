#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "logschro/errors.hpp"
#include "logschro/kernels.hpp"
#include "logschro/solver.hpp"

using namespace logschro;

TEST_CASE("precondition solves the shifted-laplacian system") {
  PeriodicGrid g = build_grid(1, 8, 32);
  CoefficientPair pair = sample_coefficients(g, {});
  std::mt19937_64 rng(31);
  SUBCASE("manufactured solution") {
    GridField w0 = oracle::smooth_field(g, rng);
    GridField lap = apply_laplacian(w0);
    GridField rhs(g);
    for (std::size_t i = 0; i < g.sites; ++i)
      rhs.values[i] = -lap.values[i] + pair.V.values[i] * w0.values[i];
    GridField w = precondition(rhs, pair);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.sites; ++i) {
      err = std::max(err, std::fabs(w.values[i] - w0.values[i]));
      scale = std::max(scale, std::fabs(w0.values[i]));
    }
    CHECK(err <= 1e-8 * scale);
  }
  SUBCASE("zero right-hand side") {
    GridField z(g);
    GridField w = precondition(z, pair);
    for (double v : w.values) CHECK(v == 0.0);
  }
  SUBCASE("plane wave scales by the discrete symbol") {
    GridField rhs(g);
    double L = g.halfwidth, h = g.spacing();
    for (std::size_t i = 0; i < g.sites; ++i)
      rhs.values[i] = std::cos(2.0 * std::numbers::pi * g.position(i)[0] / L);
    double sym = (2.0 / (h * h)) * (1.0 - std::cos(2.0 * std::numbers::pi * h / L)) + 1.0;
    GridField w = precondition(rhs, pair);
    for (std::size_t i = 0; i < g.sites; ++i)
      CHECK(std::fabs(w.values[i] - rhs.values[i] / sym) <= 1e-8);
  }
}

TEST_CASE("ground state at the canonical resolution") {
  PeriodicGrid g = build_grid(1, 8, 32);
  CoefficientPair pair = sample_coefficients(g, {});
  SolveReport rep = ground_state(pair, g);
  CHECK(rep.converged);
  CHECK(rep.residual_l2 <= 1e-8);
  CHECK(rep.positivity_min > 0.0);
  CHECK(rep.identity_gap <= 1e-6 * (1.0 + rep.energy.mass));
  CHECK(rep.nehari_t == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::fabs(rep.energy.total - oracle::kGaussonLevel1D) <= 5e-3);
  GridField exact = oracle::gausson(g);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.sites; ++i)
    sup = std::max(sup, std::fabs(rep.field.values[i] - exact.values[i]));
  CHECK(sup <= 5e-3);
  // energy is non-increasing along the descent phase (trace covers both
  // phases; the descent contract holds until the first newton step)
  for (std::size_t k = 1; k < rep.trace.size(); ++k) {
    if (rep.trace[k].residual_l2 >= 1e-4)
      CHECK(rep.trace[k].energy <= rep.trace[k - 1].energy + 1e-12 * (1.0 + std::fabs(rep.trace[k].energy)));
  }
}

TEST_CASE("ground state with periodic coefficients is grid-stable") {
  CoefficientSpec s;
  s.family = CoefficientSpec::Family::cosine;
  s.v0 = 1.0; s.v1 = 0.2; s.q0 = 1.0; s.q1 = 0.0;
  PeriodicGrid g32 = build_grid(1, 8, 32);
  PeriodicGrid g64 = build_grid(1, 8, 64);
  SolveReport r32 = ground_state(sample_coefficients(g32, s), g32);
  SolveReport r64 = ground_state(sample_coefficients(g64, s), g64);
  CHECK(r32.converged);
  CHECK(r64.converged);
  CHECK(r32.identity_gap <= 1e-6 * (1.0 + r32.energy.mass));
  // O(h^2) level movement: the refinement step shrinks the gap ~4x, so the
  // coarse-fine difference bounds the coarse error scale
  CHECK(std::fabs(r32.energy.total - r64.energy.total) <= 2e-3);
}

TEST_CASE("2d ground state matches the closed-form level within one percent") {
  PeriodicGrid g = build_grid(2, 6, 16);
  CoefficientPair pair = sample_coefficients(g, {});
  SolveReport rep = ground_state(pair, g);
  CHECK(rep.converged);
  CHECK(rep.positivity_min > 0.0);
  CHECK(std::fabs(rep.energy.total - oracle::kGaussonLevel2D) <= 0.01 * oracle::kGaussonLevel2D);
}

TEST_CASE("b_of_L is deterministic across thread counts") {
  std::vector<int> Ls = {4, 6};
  auto t1 = b_of_L({}, 1, Ls, 16, {}, 1);
  auto t2 = b_of_L({}, 1, Ls, 16, {}, 2);
  REQUIRE(t1.size() == 2);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].L == t2[i].L);
    CHECK(t1[i].b_L == t2[i].b_L);
  }
}

TEST_CASE("glue: windows, additivity, separation") {
  PeriodicGrid g = build_grid(1, 32, 16);
  CoefficientPair pair = sample_coefficients(g, {});
  SolveOptions opts;
  SolveReport ground = ground_state(pair, g, opts);
  SUBCASE("single window equals the profile on the plateau") {
    GlueSpec spec;
    spec.R = 8.0;
    spec.centers = {origin_point(g)};
    GridField glued = glue(spec, ground.field);
    for (std::size_t i = 0; i < g.sites; ++i) {
      double d = torus_distance_to_set(i, spec.centers, g);
      if (d <= 2.0) CHECK(glued.values[i] == ground.field.values[i]);
      if (d >= 4.0) CHECK(glued.values[i] == 0.0);
    }
  }
  SUBCASE("two disjoint windows add their energies") {
    GlueSpec two;
    two.R = 4.0;
    two.centers = {snap_point({0.0, 0, 0}, g), snap_point({24.0, 0, 0}, g)};
    GridField pair_field = glue(two, ground.field);
    GlueSpec one;
    one.R = 4.0;
    one.centers = {snap_point({0.0, 0, 0}, g)};
    GridField single = glue(one, ground.field);
    double e2 = energy(pair_field, pair).total;
    double e1 = energy(single, pair).total;
    CHECK(std::fabs(e2 - 2.0 * e1) <= 1e-10 * (1.0 + std::fabs(e2)));
  }
  SUBCASE("separation of four window scales is rejected") {
    GlueSpec bad;
    bad.R = 4.0;
    bad.centers = {snap_point({0.0, 0, 0}, g), snap_point({16.0, 0, 0}, g)};
    CHECK_THROWS_AS(glue(bad, ground.field), ConfigError);
  }
}

TEST_CASE("annulus minimizer") {
  PeriodicGrid g = build_grid(1, 16, 16);
  CoefficientPair pair = sample_coefficients(g, {});
  std::vector<LatticePoint> centers = {snap_point({0.0, 0, 0}, g)};
  TorusMask mask = annulus_mask(g, 3.0, centers);
  double r0 = 0.25, rho = r0 * r0 / 8.0;

  SUBCASE("zero boundary data keeps the zero minimizer") {
    GridField u(g);
    for (std::size_t i = 0; i < g.sites; ++i) {
      double d = torus_distance_to_set(i, centers, g);
      u.values[i] = d < 1.0 ? std::exp(-8.0 * d * d) : 0.0;  // deep inside the ball
    }
    GridField v = annulus_minimize(u, pair, mask, r0, rho);
    CHECK(v.values == u.values);
  }
  SUBCASE("uniqueness, monotonicity, frozen off-mask values") {
    // small field with mass in the annulus
    GridField u(g);
    for (std::size_t i = 0; i < g.sites; ++i) {
      double d = torus_distance_to_set(i, centers, g);
      u.values[i] = 0.05 * std::exp(-0.2 * d * d);
    }
    REQUIRE(annular_norm(u, pair, mask) <= r0);
    REQUIRE(annular_energy(u, pair, mask) <= rho);
    GridField v1 = annulus_minimize(u, pair, mask, r0, rho);            // init from u
    GridField zero_init(g);
    GridField v2 = annulus_minimize(u, pair, mask, r0, rho, &zero_init); // init from 0
    double gap = 0.0;
    for (std::size_t i = 0; i < g.sites; ++i)
      gap = std::max(gap, std::fabs(v1.values[i] - v2.values[i]));
    CHECK(gap <= 1e-9);
    for (std::size_t i = 0; i < g.sites; ++i)
      if (!mask.inside[i]) CHECK(v1.values[i] == u.values[i]);
    CHECK(energy(v1, pair).total <= energy(u, pair).total + 1e-12);
    CHECK(annular_energy(v1, pair, mask) <= annular_energy(u, pair, mask) + 1e-12);
    CHECK(annular_norm(v1, pair, mask) < r0);
  }
  SUBCASE("preconditions are enforced") {
    GridField u(g);
    for (std::size_t i = 0; i < g.sites; ++i) u.values[i] = 1.0;  // huge annular norm
    CHECK_THROWS_AS(annulus_minimize(u, pair, mask, r0, rho), ConfigError);
    GridField z(g);
    CHECK_THROWS_AS(annulus_minimize(z, pair, mask, r0, 0.3 * r0 * r0), ConfigError);
  }
}

TEST_CASE("newton linearization matches finite differences of the residual") {
  PeriodicGrid g = build_grid(1, 4, 16);
  CoefficientPair pair = sample_coefficients(g, {});
  std::mt19937_64 rng(33);
  GridField u = oracle::smooth_positive_field(g, rng);
  GridField v = oracle::smooth_field(g, rng);
  double eps = 1e-5;
  GridField up = u, um = u;
  kernels::axpy(eps, v.data(), up.data(), g.sites);
  kernels::axpy(-eps, v.data(), um.data(), g.sites);
  GridField rp = residual(up, pair), rm = residual(um, pair);
  // assembled jacobian apply: -Lap v + (V - Q g'(u)) v
  GridField lap = apply_laplacian(v);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.sites; ++i) {
    double gp = std::log(u.values[i] * u.values[i]) + 2.0;
    double jv = -lap.values[i] + (pair.V.values[i] - pair.Q.values[i] * gp) * v.values[i];
    double fd = (rp.values[i] - rm.values[i]) / (2.0 * eps);
    err = std::max(err, std::fabs(jv - fd));
    scale = std::max(scale, std::fabs(jv));
  }
  CHECK(err <= 1e-7 * (1.0 + scale));
}

TEST_CASE("two-bump solve at a compact configuration") {
  PeriodicGrid g = build_grid(1, 24, 16);
  CoefficientPair pair = sample_coefficients(g, {});
  GlueSpec spec;
  spec.R = 4.0;
  spec.centers = {snap_point({0.0, 0, 0}, g), snap_point({20.0, 0, 0}, g)};
  SolveOptions opts;
  opts.r_attach = 2.5;
  MultibumpReport rep = solve_multibump(spec, pair, g, opts);
  CHECK(rep.base.converged);
  CHECK(rep.base.residual_l2 <= 1e-8);
  CHECK(rep.base.positivity_min > 0.0);
  CHECK(rep.distance_to_glued <= 2.0 * rep.attach_radius);
  CHECK(rep.annulus_energy <= rep.annulus_budget);
  CHECK(rep.level_in_window);
  REQUIRE(rep.bump_energies.size() == 2);
  CHECK(rep.bump_energies[0] == doctest::Approx(rep.ground_level).epsilon(2e-3));
  CHECK(rep.bump_energies[1] == doctest::Approx(rep.ground_level).epsilon(2e-3));

  SUBCASE("torus wrap of a center reproduces the identical report") {
    GlueSpec wrapped = spec;
    wrapped.centers[1][0] += 2 * g.halfwidth * g.points_per_unit;
    MultibumpReport rep2 = solve_multibump(wrapped, pair, g, opts);
    CHECK(rep2.base.field.values == rep.base.field.values);
    CHECK(rep2.base.energy.total == rep.base.energy.total);
  }
}

TEST_CASE("three bumps triple the level") {
  PeriodicGrid g = build_grid(1, 30, 8);
  CoefficientPair pair = sample_coefficients(g, {});
  GlueSpec spec;
  spec.R = 4.0;
  spec.centers = {snap_point({0.0, 0, 0}, g), snap_point({20.0, 0, 0}, g),
                  snap_point({40.0, 0, 0}, g)};
  SolveOptions opts;
  opts.r_attach = 3.0;
  MultibumpReport rep = solve_multibump(spec, pair, g, opts);
  CHECK(rep.base.converged);
  CHECK(std::fabs(rep.base.energy.total - 3.0 * rep.ground_level) <=
        0.01 * 3.0 * rep.ground_level);
}

TEST_CASE("multibump rejects an overlapping spec") {
  PeriodicGrid g = build_grid(1, 24, 16);
  CoefficientPair pair = sample_coefficients(g, {});
  GlueSpec spec;
  spec.R = 4.0;
  spec.centers = {snap_point({0.0, 0, 0}, g), snap_point({16.0, 0, 0}, g)};  // |P| = 4R
  CHECK_THROWS_AS(solve_multibump(spec, pair, g, {}), ConfigError);
}
