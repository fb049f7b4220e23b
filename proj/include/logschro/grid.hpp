#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Uniform periodic lattice on the torus [-L,L]^N, fields on it, sampled
// coefficients, and the discrete differential/integral operators.

namespace logschro {

using LatticePoint = std::array<int, 3>;  // site-index units; unused axes 0

struct PeriodicGrid {
  int dim = 1;             // N in {1,2,3}
  int halfwidth = 1;       // L
  int points_per_unit = 4; // M, so spacing = 1/M
  int extent = 8;          // sites per axis = 2*L*M
  std::size_t sites = 8;   // extent^dim

  double spacing() const { return 1.0 / points_per_unit; }
  double cell_volume() const;
  int wrap(int k) const {
    int m = k % extent;
    return m < 0 ? m + extent : m;
  }
  // x = -L + k/M for the wrapped axis index k
  double coordinate(int k) const {
    return -halfwidth + static_cast<double>(wrap(k)) / points_per_unit;
  }
  std::size_t index(const LatticePoint& k) const;
  LatticePoint site(std::size_t idx) const;
  std::array<double, 3> position(std::size_t idx) const;

  bool operator==(const PeriodicGrid&) const = default;
};

inline constexpr std::size_t kSiteBudget = std::size_t(1) << 26;

PeriodicGrid build_grid(int dim, int halfwidth, int points_per_unit);

// round-half-toward-zero snap of a physical coordinate to a site count
int snap_to_sites(double x, int points_per_unit);
// absolute lattice point of a physical position: site (x + L) * M per axis
LatticePoint snap_point(const std::array<double, 3>& x, const PeriodicGrid& g);
// lattice point of the physical origin
LatticePoint origin_point(const PeriodicGrid& g);

struct GridField {
  PeriodicGrid grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(const PeriodicGrid& g) : grid(g), values(g.sites, 0.0) {}
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
  std::size_t size() const { return values.size(); }
};

void require_same_grid(const GridField& a, const GridField& b, const char* what);
void require_finite(const GridField& u, const char* what);

struct CoefficientSpec {
  enum class Family { constant, cosine } family = Family::constant;
  // constant: V = v0, Q = q0. cosine: V = v0 + v1*prod_i cos(2 pi x_i),
  // Q = q0 + q1*prod_i cos(2 pi x_i).
  double v0 = 1.0, v1 = 0.0, q0 = 1.0, q1 = 0.0;
  bool normalize = false;  // permit min V <= 0; caller applies normalize_potential
  std::string describe() const;
};

struct CoefficientPair {
  GridField V;
  GridField Q;
  CoefficientSpec spec;
};

CoefficientPair sample_coefficients(const PeriodicGrid& grid, const CoefficientSpec& spec);

struct NormalizedPotential {
  CoefficientPair pair;
  double lambda;   // solutions map back via u = lambda * v
  double log_lambda_sq;
};
NormalizedPotential normalize_potential(const CoefficientPair& pair);

// centered second-order stencil with periodic wrap; returns Laplacian(u)
GridField apply_laplacian(const GridField& u);

// <u,v> = sum(grad u . grad v + V u v) h^N with forward-difference gradients
double inner_product_EL(const GridField& u, const GridField& v, const CoefficientPair& pair);
double norm_EL(const GridField& u, const CoefficientPair& pair);

double integrate(const GridField& w);

// shifted copy: out(site) = u(site + e_axis), periodic
GridField shift_plus_one(const GridField& u, int axis);

// smooth radial plateau: 1 for dist <= R/4, 0 for dist >= R/2, |grad| <= 8/R
GridField cutoff_field(const PeriodicGrid& grid, double R, const LatticePoint& center);

// cyclic lattice shift: out(x) = u(x - shift), exact permutation
GridField translate(const GridField& u, const LatticePoint& shift);

// min over wraps of the Euclidean distance, in physical units
double torus_distance(const LatticePoint& a, const LatticePoint& b, const PeriodicGrid& grid);
double torus_distance_to_set(std::size_t site, const std::vector<LatticePoint>& centers,
                             const PeriodicGrid& grid);

struct TorusMask {
  enum class Role { ball, annulus, cutoff_support, window };
  PeriodicGrid grid;
  std::vector<std::uint8_t> inside;
  Role role = Role::annulus;

  std::size_t count() const;
  double measure() const;  // count * h^N
};

TorusMask all_true_mask(const PeriodicGrid& grid);
// inside wherever the torus distance to every center is >= R;
// centers must be pairwise >= 5R apart
TorusMask annulus_mask(const PeriodicGrid& grid, double R, const std::vector<LatticePoint>& centers);
// inside wherever the distance to the center set is <= W
TorusMask ball_mask(const PeriodicGrid& grid, double W, const std::vector<LatticePoint>& centers);

}  // namespace logschro
