#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "logschro/analysis.hpp"
#include "logschro/errors.hpp"
#include "logschro/kernels.hpp"
#include "logschro/nonlinearity.hpp"

using namespace logschro;

TEST_CASE("concentration indicator") {
  PeriodicGrid g = build_grid(1, 8, 16);
  SUBCASE("zero field reports zero at the origin") {
    GridField z(g);
    ConcentrationIndicator ind = concentration_indicator(z, 4.0);
    CHECK(ind.d == 0.0);
    CHECK(ind.anchor[0] == g.halfwidth * g.points_per_unit);  // the origin window
  }
  SUBCASE("single bump is located within one unit") {
    GridField u(g);
    LatticePoint c = snap_point({3.0, 0, 0}, g);
    for (std::size_t i = 0; i < g.sites; ++i) {
      double d = torus_distance(g.site(i), c, g);
      u.values[i] = std::exp(-d * d);
    }
    ConcentrationIndicator ind = concentration_indicator(u, 4.0);
    CHECK(torus_distance(ind.anchor, c, g) <= 1.0);
  }
  SUBCASE("equivariant under unit translations") {
    std::mt19937_64 rng(41);
    GridField u = oracle::smooth_field(g, rng);
    ConcentrationIndicator a = concentration_indicator(u, 4.0);
    LatticePoint shift{5 * g.points_per_unit, 0, 0};
    ConcentrationIndicator b = concentration_indicator(translate(u, shift), 4.0);
    CHECK(a.d == doctest::Approx(b.d).epsilon(1e-13));
    LatticePoint moved{a.anchor[0] + shift[0], 0, 0};
    CHECK(torus_distance(b.anchor, moved, g) == 0.0);
  }
  SUBCASE("invalid exponents are rejected") {
    GridField z(g);
    CHECK_THROWS_AS(concentration_indicator(z, 2.0), ConfigError);
    PeriodicGrid g3 = build_grid(3, 1, 8);
    GridField z3(g3);
    CHECK_THROWS_AS(concentration_indicator(z3, 7.0), ConfigError);
  }
}

TEST_CASE("windowed Lq bound") {
  CoefficientSpec coeff;
  SUBCASE("zero field gives the defined-as-zero ratio") {
    PeriodicGrid g = build_grid(1, 4, 8);
    CoefficientPair pair = sample_coefficients(g, coeff);
    GridField z(g);
    LqBoundCheck c = windowed_lq_bound_check(z, 4.0, pair);
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == 0.0);
    CHECK(c.ratio == 0.0);
  }
  SUBCASE("calibrated constant holds across box sizes") {
    double C = calibrate_lq_constant(coeff, 1, 4, 8, 4.0, 60, 42);
    CHECK(C > 0.0);
    for (int L : {8, 16}) {
      PeriodicGrid g = build_grid(1, L, 8);
      CoefficientPair pair = sample_coefficients(g, coeff);
      for (int i = 0; i < 60; ++i) {
        GridField u = random_corpus_field(g, 42, i);
        LqBoundCheck c = windowed_lq_bound_check(u, 4.0, pair);
        CHECK(c.ratio <= C);
      }
    }
  }
  SUBCASE("spread fields keep a uniformly bounded ratio as the box grows") {
    double worst = 0.0;
    for (int L : {4, 8, 16}) {
      PeriodicGrid g = build_grid(1, L, 8);
      CoefficientPair pair = sample_coefficients(g, coeff);
      GridField u(g);
      std::fill(u.values.begin(), u.values.end(), 0.37);
      LqBoundCheck c = windowed_lq_bound_check(u, 4.0, pair);
      worst = std::max(worst, c.ratio);
      CHECK(c.ratio <= 2.0 * worst + 1e-12);  // no growth trend with L
    }
  }
}

TEST_CASE("vanishing families: indicator and H-mass decay together") {
  PeriodicGrid g = build_grid(1, 8, 8);
  CoefficientPair pair = sample_coefficients(g, {});
  double prev_d = 1e300, prev_h = 1e300;
  for (int k = 2; k <= 10; ++k) {
    double eps = std::pow(2.0, -k);
    GridField u(g);
    std::fill(u.values.begin(), u.values.end(), eps);
    ConcentrationIndicator ind = concentration_indicator(u, 4.0);
    GridField Hu(g);
    for (std::size_t i = 0; i < g.sites; ++i) Hu.values[i] = nonlin::H(u.values[i]);
    double hmass = integrate(Hu);
    CHECK(ind.d < prev_d);
    CHECK(hmass < prev_h);
    prev_d = ind.d;
    prev_h = hmass;
  }
}

TEST_CASE("bump decomposition") {
  PeriodicGrid g = build_grid(1, 32, 16);
  CoefficientPair pair = sample_coefficients(g, {});
  const double thr = 0.5 * nonlin::kInvE;

  SUBCASE("synthetic two-bump field recovers both centers") {
    GridField u(g);
    LatticePoint c0 = snap_point({0.0, 0, 0}, g);
    LatticePoint c1 = snap_point({24.0, 0, 0}, g);
    for (std::size_t i = 0; i < g.sites; ++i) {
      double d0 = torus_distance(g.site(i), c0, g);
      double d1 = torus_distance(g.site(i), c1, g);
      u.values[i] = std::exp(1.0 - 0.5 * d0 * d0) + std::exp(1.0 - 0.5 * d1 * d1);
    }
    BumpDecomposition dec = decompose_bumps(u, pair, 12.0, thr);
    REQUIRE(dec.centers.size() == 2);
    CHECK(torus_distance(dec.centers[0], c0, g) <= 1.0);
    CHECK(torus_distance(dec.centers[1], c1, g) <= 1.0);
    CHECK(dec.pairwise_distances[0][1] == doctest::Approx(24.0).epsilon(1e-12));
    double gap = energy_splitting_check(dec, dec.total_energy);
    CHECK(gap <= 1e-2 * std::fabs(dec.total_energy));
    // remainder recomputed independently
    GridField rem = u;
    for (const GridField& p : dec.profiles)
      for (std::size_t i = 0; i < g.sites; ++i) rem.values[i] -= p.values[i];
    CHECK(std::fabs(norm_EL(rem, pair) - dec.remainder_norm) <= 1e-12 * (1.0 + dec.remainder_norm));
  }

  SUBCASE("narrow windows abort as unresolved") {
    GridField u = oracle::gausson(g);
    CHECK_THROWS_AS(decompose_bumps(u, pair, 4.0, thr), CheckError);
  }

  SUBCASE("single profile captures the level up to the windowing tail") {
    GridField u = oracle::gausson(g);
    BumpDecomposition dec = decompose_bumps(u, pair, 16.0, thr);
    REQUIRE(dec.centers.size() == 1);
    CHECK(std::fabs(dec.energies[0] - dec.total_energy) <= 1e-3);
    // windowing loss shrinks as the window grows
    BumpDecomposition dec12 = decompose_bumps(u, pair, 12.0, thr);
    CHECK(energy_splitting_check(dec, dec.total_energy) <=
          energy_splitting_check(dec12, dec12.total_energy));
  }

  SUBCASE("zero field with a positive threshold decomposes to nothing") {
    GridField z(g);
    BumpDecomposition dec = decompose_bumps(z, pair, 12.0, 0.1);
    CHECK(dec.centers.empty());
    CHECK(dec.remainder_norm == 0.0);
  }

  SUBCASE("nonpositive thresholds are rejected") {
    GridField u = oracle::gausson(g);
    CHECK_THROWS_AS(decompose_bumps(u, pair, 12.0, 0.0), ConfigError);
  }

  SUBCASE("translation equivariance under unit shifts") {
    GridField u = oracle::gausson(g);
    LatticePoint shift{7 * g.points_per_unit, 0, 0};
    BumpDecomposition a = decompose_bumps(u, pair, 16.0, thr);
    BumpDecomposition b = decompose_bumps(translate(u, shift), pair, 16.0, thr);
    REQUIRE(a.centers.size() == b.centers.size());
    LatticePoint moved{a.centers[0][0] + shift[0], 0, 0};
    CHECK(torus_distance(b.centers[0], moved, g) == 0.0);
    CHECK(a.energies[0] == doctest::Approx(b.energies[0]).epsilon(1e-12));
  }
}

TEST_CASE("energy splitting of the empty decomposition") {
  BumpDecomposition dec;
  CHECK(energy_splitting_check(dec, 0.0) == 0.0);
}

TEST_CASE("decay fits") {
  PeriodicGrid g = build_grid(1, 8, 32);
  SUBCASE("closed-form profile decays faster than slope -2 on [2,4]") {
    GridField u = oracle::gausson(g);
    DecayFit fit = decay_fit(u, {origin_point(g)}, 2.0, 4.0);
    CHECK(fit.slope <= -2.0);
    CHECK(fit.r_squared >= 0.9);
  }
  SUBCASE("constant field has no decay (diagnostic, not a crash)") {
    GridField c(g);
    std::fill(c.values.begin(), c.values.end(), 0.5);
    DecayFit fit = decay_fit(c, {origin_point(g)}, 2.0, 6.0);
    CHECK(std::fabs(fit.slope) <= 0.1);
  }
  SUBCASE("too few usable shells is an error") {
    GridField u = oracle::gausson(g);
    CHECK_THROWS_AS(decay_fit(u, {origin_point(g)}, 2.0, 3.0), CheckError);
    GridField z(g);
    CHECK_THROWS_AS(decay_fit(z, {origin_point(g)}, 2.0, 6.0), CheckError);  // all shells zero
  }
}

TEST_CASE("windowed distances across box sizes") {
  CoefficientSpec coeff;
  SUBCASE("identical runs have exactly zero distance") {
    PeriodicGrid g = build_grid(1, 4, 16);
    CoefficientPair pair = sample_coefficients(g, coeff);
    SolveReport a = ground_state(pair, g);
    SolveReport b = ground_state(pair, g);
    CHECK(windowed_distance(a.field, pair, b.field, {origin_point(g)}, 1.0) == 0.0);
    CHECK(a.field.values == b.field.values);  // bitwise rerun
  }
  SUBCASE("truncation error decays visibly at small boxes") {
    // L = 3,4,5: the wrap perturbation is above the solver floor and shrinks
    std::vector<double> d;
    GridField prev;
    CoefficientPair prev_pair;
    for (int L : {3, 4, 5}) {
      PeriodicGrid g = build_grid(1, L, 16);
      CoefficientPair pair = sample_coefficients(g, coeff);
      SolveReport rep = ground_state(pair, g);
      if (L > 3)
        d.push_back(windowed_distance(prev, prev_pair, rep.field, {origin_point(prev.grid)}, 1.0));
      prev = rep.field;
      prev_pair = pair;
    }
    REQUIRE(d.size() == 2);
    CHECK(d[0] > d[1]);
    CHECK(d[0] > 1e-3);   // visible signal
    CHECK(d[1] < 1e-2);
  }
}

TEST_CASE("cross-L multibump stabilization table") {
  CoefficientSpec coeff;
  SolveOptions opts;
  opts.r_attach = 2.5;
  auto rows = cross_L_stability(coeff, 4.0, {{0.0, 0, 0}, {20.0, 0, 0}}, 1, {24, 32}, 8, 10.0, opts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].distance_to_prev == 0.0);
  CHECK(rows[1].distance_to_prev >= 0.0);
  CHECK(std::fabs(rows[0].energy - rows[1].energy) <= 1e-6 * std::fabs(rows[0].energy));
}
