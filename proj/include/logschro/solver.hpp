#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logschro/functional.hpp"
#include "logschro/grid.hpp"

// Ground-state computation by Nehari-projected preconditioned descent with a
// damped-Newton polish, the annulus minimization subproblem, and k-bump
// gluing with trust-region Newton plus periodic annulus stabilization.

namespace logschro {

struct SolveOptions {
  double tol = 1e-8;           // residual_l2 target
  int max_iter = 5000;
  double newton_switch = 1e-4; // residual_l2 below which Newton polish starts
  int stabilize_every = 10;    // annulus pass cadence (multibump)
  double r_attach = 0.0;       // attach radius r; 0 picks r0/2 from calibration
  double rho = 0.0;            // annulus energy budget; 0 picks r0^2/8
  std::uint64_t seed = 42;
};

struct TraceEntry {
  int iter;
  double energy;
  double residual_l2;
};

struct SolveReport {
  GridField field;
  EnergyBreakdown energy;
  double residual_l2 = 0.0;
  double residual_sup = 0.0;
  int iterations = 0;
  double nehari_t = 1.0;
  double identity_gap = 0.0;   // |J - 1/2 int Q u^2|
  double positivity_min = 0.0; // min over sites
  bool converged = false;
  std::vector<TraceEntry> trace;
  std::string note;
};

// solves (-Lap + V) w = rhs by conjugate gradients to relative tolerance
// 1e-10; the result is the Riesz representative of the derivative
GridField precondition(const GridField& rhs, const CoefficientPair& pair);

// symmetric (possibly indefinite) solver used for Newton systems
struct MinresResult {
  GridField x;
  double relative_residual;
  int iterations;
  bool converged;
};

SolveReport ground_state(const CoefficientPair& pair, const PeriodicGrid& grid,
                         const SolveOptions& opts = {});

struct BLevelRow {
  int L;
  double b_L;
};
std::vector<BLevelRow> b_of_L(const CoefficientSpec& coeff, int dim,
                              const std::vector<int>& L_list, int points_per_unit,
                              const SolveOptions& opts = {}, int threads = 1);

struct GlueSpec {
  double R = 4.0;
  std::vector<LatticePoint> centers;        // site units
  std::vector<LatticePoint> source_shifts;  // integer units (Z^N action); empty = none

  void validate(const PeriodicGrid& grid, std::size_t min_centers = 1) const;
};

// sum over centers of the cutoff-windowed, translated profile
GridField glue(const GlueSpec& spec, const GridField& ground);

// minimizes the frozen-boundary restriction of J over the masked sites;
// strictly convex in the small-norm regime. v equals u off the mask bitwise.
GridField annulus_minimize(const GridField& u, const CoefficientPair& pair, const TorusMask& mask,
                           double r0, double rho, const GridField* init = nullptr);

struct MultibumpReport {
  SolveReport base;
  GridField glued;
  double distance_to_glued = 0.0;  // E-norm distance, must stay <= 2r
  double attach_radius = 0.0;      // the r in force
  double annulus_energy = 0.0;
  double annulus_budget = 0.0;     // rho
  double r0 = 0.0;
  double ground_level = 0.0;       // b at this grid
  std::vector<double> bump_energies;
  double level_lo = 0.0, level_hi = 0.0;  // k*b -/+ alpha window
  bool level_in_window = false;
};

MultibumpReport solve_multibump(const GlueSpec& spec, const CoefficientPair& pair,
                                const PeriodicGrid& grid, const SolveOptions& opts = {},
                                const GridField* ground = nullptr);

}  // namespace logschro
