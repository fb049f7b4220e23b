#pragma once

#include <cstdint>
#include <vector>

#include "logschro/grid.hpp"
#include "logschro/solver.hpp"

// Concentration diagnostics: windowed L^q indicators, greedy bump extraction,
// shell-wise decay fits, and cross-box stabilization checks.

namespace logschro {

struct ConcentrationIndicator {
  double d = 0.0;        // max windowed L^q norm
  LatticePoint anchor{}; // window anchor, site units (integer point * M)
};

// max over integer anchors n of the L^q norm on the cube [n-1, n+1)^N;
// ties resolved to the lexicographically smallest wrapped-nonnegative anchor
ConcentrationIndicator concentration_indicator(const GridField& u, double q);

struct LqBoundCheck {
  double lhs = 0.0;   // ||u||_Lq^q over the torus
  double rhs = 0.0;   // d^(q-2) * ||u||_E^2
  double ratio = 0.0; // lhs/rhs, 0 when both vanish
};

LqBoundCheck windowed_lq_bound_check(const GridField& u, double q, const CoefficientPair& pair);

// seeded corpus generator shared by the calibration and validation sweeps
GridField random_corpus_field(const PeriodicGrid& grid, std::uint64_t seed, int index);

// C = headroom * max ratio over a corpus at one box size; the bound is then
// asserted with the same C at larger boxes
double calibrate_lq_constant(const CoefficientSpec& coeff, int dim, int L, int points_per_unit,
                             double q, int corpus_size, std::uint64_t seed);

struct BumpDecomposition {
  std::vector<LatticePoint> centers;
  std::vector<GridField> profiles;
  std::vector<double> energies;
  double remainder_norm = 0.0;
  std::vector<std::vector<double>> pairwise_distances;
  double total_energy = 0.0;
};

// greedy peak extraction with cutoff windows of scale R; aborts with
// CheckError("bumps unresolved...") when a new peak lands within 2R of a
// previously extracted center
BumpDecomposition decompose_bumps(const GridField& u, const CoefficientPair& pair, double R,
                                  double threshold);

double energy_splitting_check(const BumpDecomposition& dec, double total);

struct DecayFit {
  std::vector<double> radii;
  std::vector<double> max_abs;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// least-squares line through (r, log max|u| on the shell [r, r+1)); shells
// with zero sup are dropped; fewer than three usable shells is an error
DecayFit decay_fit(const GridField& u, const std::vector<LatticePoint>& centers, double R_min,
                   double R_max);

// E-norm distance between fields on different boxes (same spacing), restricted
// to the union of balls of radius W around the centers
double windowed_distance(const GridField& a, const CoefficientPair& pair_a, const GridField& b,
                         const std::vector<LatticePoint>& centers, double W);

struct CrossLRow {
  int L;
  double energy;
  double distance_to_prev;  // windowed distance to the previous box, 0 for the first
};

// solves the same multibump problem (physical centers, snapped per box) at
// each L and reports windowed distances between consecutive solutions
std::vector<CrossLRow> cross_L_stability(const CoefficientSpec& coeff, double R,
                                         const std::vector<std::array<double, 3>>& centers,
                                         int dim, const std::vector<int>& L_list,
                                         int points_per_unit, double window,
                                         const SolveOptions& opts = {});

}  // namespace logschro
