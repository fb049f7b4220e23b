#include "logschro/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "logschro/kernels.hpp"

namespace logschro {

double PeriodicGrid::cell_volume() const {
  double h = spacing();
  double v = h;
  for (int d = 1; d < dim; ++d) v *= h;
  return v;
}

std::size_t PeriodicGrid::index(const LatticePoint& k) const {
  // row-major: axis 0 slowest, last axis contiguous
  std::size_t idx = 0;
  for (int d = 0; d < dim; ++d) idx = idx * extent + static_cast<std::size_t>(wrap(k[d]));
  return idx;
}

LatticePoint PeriodicGrid::site(std::size_t idx) const {
  LatticePoint k{0, 0, 0};
  for (int d = dim - 1; d >= 0; --d) {
    k[d] = static_cast<int>(idx % extent);
    idx /= extent;
  }
  return k;
}

std::array<double, 3> PeriodicGrid::position(std::size_t idx) const {
  LatticePoint k = site(idx);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) x[d] = coordinate(k[d]);
  return x;
}

PeriodicGrid build_grid(int dim, int halfwidth, int points_per_unit) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("build_grid: dim must be 1, 2 or 3");
  if (halfwidth < 1) throw std::invalid_argument("build_grid: halfwidth L must be >= 1");
  if (points_per_unit < 4)
    throw std::invalid_argument("build_grid: points_per_unit M must be >= 4");
  PeriodicGrid g;
  g.dim = dim;
  g.halfwidth = halfwidth;
  g.points_per_unit = points_per_unit;
  long long ext = 2LL * halfwidth * points_per_unit;
  long long sites = 1;
  for (int d = 0; d < dim; ++d) {
    sites *= ext;
    if (sites > static_cast<long long>(kSiteBudget))
      throw std::invalid_argument("build_grid: site count exceeds the 2^26 budget");
  }
  g.extent = static_cast<int>(ext);
  g.sites = static_cast<std::size_t>(sites);
  return g;
}

int snap_to_sites(double x, int points_per_unit) {
  double t = x * points_per_unit;
  double a = std::floor(t);
  double fr = t - a;
  if (fr > 0.5) return static_cast<int>(a) + 1;
  if (fr < 0.5) return static_cast<int>(a);
  return t < 0.0 ? static_cast<int>(a) + 1 : static_cast<int>(a);  // half toward zero
}

LatticePoint snap_point(const std::array<double, 3>& x, const PeriodicGrid& g) {
  LatticePoint p{0, 0, 0};
  for (int d = 0; d < g.dim; ++d)
    p[d] = snap_to_sites(x[d], g.points_per_unit) + g.halfwidth * g.points_per_unit;
  return p;
}

LatticePoint origin_point(const PeriodicGrid& g) {
  LatticePoint p{0, 0, 0};
  for (int d = 0; d < g.dim; ++d) p[d] = g.halfwidth * g.points_per_unit;
  return p;
}

void require_same_grid(const GridField& a, const GridField& b, const char* what) {
  if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(what) + ": grids differ");
}

void require_finite(const GridField& u, const char* what) {
  for (double v : u.values)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite field value");
}

std::string CoefficientSpec::describe() const {
  std::ostringstream os;
  if (family == Family::constant)
    os << "constant(v=" << v0 << ", q=" << q0 << ")";
  else
    os << "cosine(v0=" << v0 << ", v1=" << v1 << ", q0=" << q0 << ", q1=" << q1 << ")";
  if (normalize) os << " normalized";
  return os.str();
}

CoefficientPair sample_coefficients(const PeriodicGrid& grid, const CoefficientSpec& spec) {
  CoefficientPair pair;
  pair.spec = spec;
  pair.V = GridField(grid);
  pair.Q = GridField(grid);
  const int M = grid.points_per_unit;
  if (spec.family == CoefficientSpec::Family::constant) {
    std::fill(pair.V.values.begin(), pair.V.values.end(), spec.v0);
    std::fill(pair.Q.values.begin(), pair.Q.values.end(), spec.q0);
  } else {
    // sample cos(2 pi x) through k mod M so the fields are exactly M-site
    // periodic in floating point
    std::vector<double> cs(M);
    for (int k = 0; k < M; ++k)
      cs[k] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / M);
    for (std::size_t i = 0; i < grid.sites; ++i) {
      LatticePoint k = grid.site(i);
      double prod = 1.0;
      for (int d = 0; d < grid.dim; ++d) prod *= cs[k[d] % M];
      pair.V.values[i] = spec.v0 + spec.v1 * prod;
      pair.Q.values[i] = spec.q0 + spec.q1 * prod;
    }
  }
  double qmin = kernels::min_value(pair.Q.data(), grid.sites);
  if (qmin <= 0.0)
    throw std::invalid_argument("sample_coefficients: Q must be strictly positive everywhere (min Q = " +
                                std::to_string(qmin) + ")");
  double vmin = kernels::min_value(pair.V.data(), grid.sites);
  if (vmin <= 0.0 && !spec.normalize)
    throw std::invalid_argument(
        "sample_coefficients: min V <= 0 requires normalize_potential (min V = " +
        std::to_string(vmin) + ")");
  return pair;
}

NormalizedPotential normalize_potential(const CoefficientPair& pair) {
  const std::size_t n = pair.V.size();
  double m = pair.V.values[0] / pair.Q.values[0];
  for (std::size_t i = 1; i < n; ++i) m = std::min(m, pair.V.values[i] / pair.Q.values[i]);
  double log_lambda_sq = m - 1.0;
  NormalizedPotential out;
  out.pair = pair;
  out.log_lambda_sq = log_lambda_sq;
  out.lambda = std::exp(0.5 * log_lambda_sq);
  for (std::size_t i = 0; i < n; ++i)
    out.pair.V.values[i] = pair.V.values[i] - pair.Q.values[i] * log_lambda_sq;
  return out;
}

namespace {

// row-wise helpers for the axis passes; rows of length `extent` are
// contiguous along the last axis
void axis_neighbor_pass(const GridField& u, GridField& out) {
  const PeriodicGrid& g = u.grid;
  const int nx = g.extent;
  const std::size_t n = g.sites;
  const double* uv = u.data();
  double* ov = out.data();
  // contiguous axis
  for (std::size_t row = 0; row < n / nx; ++row)
    kernels::stencil_row_periodic(uv + row * nx, ov + row * nx, nx);
  if (g.dim >= 2) {
    // neighbor rows along the second-to-last axis, wrapped within each plane
    std::size_t plane = static_cast<std::size_t>(nx) * nx;
    for (std::size_t p = 0; p < n / plane; ++p) {
      const double* up = uv + p * plane;
      double* op = ov + p * plane;
      for (int r = 0; r < nx; ++r) {
        const double* prev = up + static_cast<std::size_t>((r + nx - 1) % nx) * nx;
        const double* next = up + static_cast<std::size_t>((r + 1) % nx) * nx;
        kernels::add2(prev, next, op + static_cast<std::size_t>(r) * nx, nx);
      }
    }
  }
  if (g.dim == 3) {
    std::size_t plane = static_cast<std::size_t>(nx) * nx;
    for (int z = 0; z < nx; ++z) {
      const double* prev = uv + static_cast<std::size_t>((z + nx - 1) % nx) * plane;
      const double* next = uv + static_cast<std::size_t>((z + 1) % nx) * plane;
      kernels::add2(prev, next, ov + static_cast<std::size_t>(z) * plane, plane);
    }
  }
}

}  // namespace

GridField apply_laplacian(const GridField& u) {
  GridField out(u.grid);
  axis_neighbor_pass(u, out);
  double inv_h2 = static_cast<double>(u.grid.points_per_unit) * u.grid.points_per_unit;
  kernels::finish_laplacian(u.data(), 2.0 * u.grid.dim, inv_h2, out.data(), u.grid.sites);
  return out;
}

GridField shift_plus_one(const GridField& u, int axis) {
  const PeriodicGrid& g = u.grid;
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("shift_plus_one: bad axis");
  GridField out(g);
  const int nx = g.extent;
  const std::size_t n = g.sites;
  const double* uv = u.data();
  double* ov = out.data();
  if (axis == g.dim - 1) {
    for (std::size_t row = 0; row < n / nx; ++row) {
      const double* src = uv + row * nx;
      double* dst = ov + row * nx;
      std::memcpy(dst, src + 1, sizeof(double) * (nx - 1));
      dst[nx - 1] = src[0];
    }
    return out;
  }
  // shifting whole rows/planes
  std::size_t block = 1;
  for (int d = axis + 1; d < g.dim; ++d) block *= nx;
  std::size_t groups = n / (block * nx);
  for (std::size_t gix = 0; gix < groups; ++gix) {
    const double* base = uv + gix * block * nx;
    double* dst = ov + gix * block * nx;
    for (int r = 0; r < nx; ++r) {
      const double* src = base + static_cast<std::size_t>((r + 1) % nx) * block;
      std::memcpy(dst + static_cast<std::size_t>(r) * block, src, sizeof(double) * block);
    }
  }
  return out;
}

double inner_product_EL(const GridField& u, const GridField& v, const CoefficientPair& pair) {
  require_same_grid(u, v, "inner_product_EL");
  require_same_grid(u, pair.V, "inner_product_EL(coefficients)");
  const PeriodicGrid& g = u.grid;
  const std::size_t n = g.sites;
  double grad = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    GridField su = shift_plus_one(u, axis);
    GridField sv = shift_plus_one(v, axis);
    grad += kernels::diff_dot(su.data(), u.data(), sv.data(), v.data(), n);
  }
  double inv_h2 = static_cast<double>(g.points_per_unit) * g.points_per_unit;
  double vterm = kernels::wdot(u.data(), v.data(), pair.V.data(), n);
  return (grad * inv_h2 + vterm) * g.cell_volume();
}

double norm_EL(const GridField& u, const CoefficientPair& pair) {
  return std::sqrt(inner_product_EL(u, u, pair));
}

double integrate(const GridField& w) {
  return kernels::sum(w.data(), w.grid.sites) * w.grid.cell_volume();
}

GridField cutoff_field(const PeriodicGrid& grid, double R, const LatticePoint& center) {
  if (R < 1.0) throw std::invalid_argument("cutoff_field: R must be >= 1");
  if (2.0 * R > grid.halfwidth)
    throw std::invalid_argument("cutoff_field: support needs 2R <= L (R = " + std::to_string(R) +
                                ", L = " + std::to_string(grid.halfwidth) + ")");
  GridField out(grid);
  const double r_in = R / 4.0, r_out = R / 2.0;
  for (std::size_t i = 0; i < grid.sites; ++i) {
    double rho = torus_distance(grid.site(i), center, grid);
    if (rho <= r_in) {
      out.values[i] = 1.0;
    } else if (rho >= r_out) {
      out.values[i] = 0.0;
    } else {
      double t = (rho - r_in) / r_in;  // transition width equals r_in
      out.values[i] = 1.0 - (3.0 * t * t - 2.0 * t * t * t);
    }
  }
  return out;
}

GridField translate(const GridField& u, const LatticePoint& shift) {
  const PeriodicGrid& g = u.grid;
  GridField out(g);
  for (std::size_t i = 0; i < g.sites; ++i) {
    LatticePoint k = g.site(i);
    LatticePoint src;
    src.fill(0);
    for (int d = 0; d < g.dim; ++d) src[d] = k[d] - shift[d];
    out.values[i] = u.values[g.index(src)];
  }
  return out;
}

double torus_distance(const LatticePoint& a, const LatticePoint& b, const PeriodicGrid& grid) {
  double s = 0.0;
  for (int d = 0; d < grid.dim; ++d) {
    int delta = grid.wrap(a[d] - b[d]);
    int w = std::min(delta, grid.extent - delta);
    double pd = static_cast<double>(w) / grid.points_per_unit;
    s += pd * pd;
  }
  return std::sqrt(s);
}

double torus_distance_to_set(std::size_t site, const std::vector<LatticePoint>& centers,
                             const PeriodicGrid& grid) {
  LatticePoint k = grid.site(site);
  double best = std::numeric_limits<double>::infinity();
  for (const LatticePoint& c : centers) best = std::min(best, torus_distance(k, c, grid));
  return best;
}

std::size_t TorusMask::count() const {
  std::size_t c = 0;
  for (std::uint8_t b : inside) c += b;
  return c;
}

double TorusMask::measure() const { return static_cast<double>(count()) * grid.cell_volume(); }

TorusMask all_true_mask(const PeriodicGrid& grid) {
  TorusMask m;
  m.grid = grid;
  m.inside.assign(grid.sites, 1);
  m.role = TorusMask::Role::window;
  return m;
}

TorusMask annulus_mask(const PeriodicGrid& grid, double R,
                       const std::vector<LatticePoint>& centers) {
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      double d = torus_distance(centers[i], centers[j], grid);
      if (d < 5.0 * R) {
        std::ostringstream os;
        os << "annulus_mask: centers " << i << " and " << j << " are " << d
           << " apart; the separation rule requires 5R = " << 5.0 * R << " <= separation";
        throw std::invalid_argument(os.str());
      }
    }
  TorusMask m;
  m.grid = grid;
  m.role = TorusMask::Role::annulus;
  m.inside.assign(grid.sites, 1);
  if (!centers.empty())
    for (std::size_t i = 0; i < grid.sites; ++i)
      m.inside[i] = torus_distance_to_set(i, centers, grid) >= R ? 1 : 0;
  return m;
}

TorusMask ball_mask(const PeriodicGrid& grid, double W, const std::vector<LatticePoint>& centers) {
  TorusMask m;
  m.grid = grid;
  m.role = TorusMask::Role::ball;
  m.inside.assign(grid.sites, 0);
  for (std::size_t i = 0; i < grid.sites; ++i)
    m.inside[i] = torus_distance_to_set(i, centers, grid) <= W ? 1 : 0;
  return m;
}

}  // namespace logschro
