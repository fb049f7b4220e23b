#include "logschro/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "logschro/errors.hpp"
#include "logschro/functional.hpp"
#include "logschro/kernels.hpp"
#include "logschro/nonlinearity.hpp"

namespace logschro {

namespace {

void check_q(double q, int dim) {
  double two_star = dim == 3 ? 6.0 : std::numeric_limits<double>::infinity();
  if (!(q > 2.0) || !(q < two_star))
    throw ConfigError("windowed L^q diagnostics need q in (2, 2*) (q = " + std::to_string(q) + ")");
}

}  // namespace

ConcentrationIndicator concentration_indicator(const GridField& u, double q) {
  const PeriodicGrid& g = u.grid;
  check_q(q, g.dim);
  const int M = g.points_per_unit;
  const int win = 2 * M;  // sites per axis in [n-1, n+1)
  const int nwin = 2 * g.halfwidth;

  ConcentrationIndicator best;
  best.anchor = {0, 0, 0};
  bool have_best = false;
  LatticePoint n{0, 0, 0};

  auto window_value = [&](const LatticePoint& anchor) {
    double s = 0.0;
    LatticePoint k{0, 0, 0};
    if (g.dim == 1) {
      for (int a = 0; a < win; ++a) {
        k[0] = anchor[0] - M + a;
        s += std::pow(std::fabs(u.values[g.index(k)]), q);
      }
    } else if (g.dim == 2) {
      for (int a = 0; a < win; ++a)
        for (int b = 0; b < win; ++b) {
          k[0] = anchor[0] - M + a;
          k[1] = anchor[1] - M + b;
          s += std::pow(std::fabs(u.values[g.index(k)]), q);
        }
    } else {
      for (int a = 0; a < win; ++a)
        for (int b = 0; b < win; ++b)
          for (int c = 0; c < win; ++c) {
            k[0] = anchor[0] - M + a;
            k[1] = anchor[1] - M + b;
            k[2] = anchor[2] - M + c;
            s += std::pow(std::fabs(u.values[g.index(k)]), q);
          }
    }
    return std::pow(s * g.cell_volume(), 1.0 / q);
  };

  // ties resolve to the anchor closest to the origin in the lexicographic
  // order of origin-relative wrapped offsets, so a constant field reports the
  // origin window
  const int origin_site = g.halfwidth * M;
  auto lex_less = [&](const LatticePoint& a, const LatticePoint& b) {
    for (int d = 0; d < g.dim; ++d) {
      int wa = g.wrap(a[d] - origin_site), wb = g.wrap(b[d] - origin_site);
      if (wa != wb) return wa < wb;
    }
    return false;
  };

  std::vector<int> idx(g.dim, 0);
  for (;;) {
    for (int d = 0; d < g.dim; ++d) n[d] = idx[d] * M;  // integer point idx - L
    double val = window_value(n);
    if (!have_best || val > best.d || (val == best.d && lex_less(n, best.anchor))) {
      best.d = val;
      best.anchor = n;
      for (int d = 0; d < g.dim; ++d) best.anchor[d] = g.wrap(best.anchor[d]);
      have_best = true;
    }
    int d = g.dim - 1;
    while (d >= 0 && ++idx[d] == nwin) idx[d--] = 0;
    if (d < 0) break;
  }
  return best;
}

LqBoundCheck windowed_lq_bound_check(const GridField& u, double q, const CoefficientPair& pair) {
  check_q(q, u.grid.dim);
  LqBoundCheck out;
  double s = 0.0;
  for (double v : u.values) s += std::pow(std::fabs(v), q);
  out.lhs = s * u.grid.cell_volume();
  ConcentrationIndicator ind = concentration_indicator(u, q);
  double nr = inner_product_EL(u, u, pair);
  out.rhs = std::pow(ind.d, q - 2.0) * nr;
  out.ratio = out.rhs == 0.0 ? 0.0 : out.lhs / out.rhs;
  return out;
}

GridField random_corpus_field(const PeriodicGrid& grid, std::uint64_t seed, int index) {
  std::mt19937_64 rng(seed + 7919ull * static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GridField u(grid);
  int kind = index % 4;
  if (kind == 0) {
    // constant spread field
    double eps = 0.01 + unit(rng);
    std::fill(u.values.begin(), u.values.end(), eps);
  } else if (kind == 1) {
    // single-site spikes, one per unit volume on average
    std::uniform_int_distribution<std::size_t> site(0, grid.sites - 1);
    long spikes = std::max<long>(1, static_cast<long>(std::pow(2.0 * grid.halfwidth, grid.dim)));
    for (long s = 0; s < spikes; ++s) u.values[site(rng)] += 2.0 * unit(rng) - 1.0;
  } else {
    // smooth bumps with density proportional to the volume, so small and
    // large boxes draw from the same per-unit ensemble
    long bumps = std::max<long>(1, static_cast<long>(std::pow(2.0 * grid.halfwidth, grid.dim) / 4));
    for (long b = 0; b < bumps; ++b) {
      LatticePoint c{0, 0, 0};
      for (int d = 0; d < grid.dim; ++d) c[d] = static_cast<int>(unit(rng) * grid.extent);
      double width = 0.3 + 1.7 * unit(rng);
      double amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 1.9 * unit(rng));
      double inv2w2 = 1.0 / (2.0 * width * width);
      for (std::size_t i = 0; i < grid.sites; ++i) {
        double rho = torus_distance(grid.site(i), c, grid);
        u.values[i] += amp * std::exp(-rho * rho * inv2w2);
      }
    }
  }
  return u;
}

double calibrate_lq_constant(const CoefficientSpec& coeff, int dim, int L, int points_per_unit,
                             double q, int corpus_size, std::uint64_t seed) {
  PeriodicGrid g = build_grid(dim, L, points_per_unit);
  CoefficientPair pair = sample_coefficients(g, coeff);
  double worst = 0.0;
  for (int i = 0; i < corpus_size; ++i) {
    GridField u = random_corpus_field(g, seed, i);
    LqBoundCheck c = windowed_lq_bound_check(u, q, pair);
    worst = std::max(worst, c.ratio);
  }
  return 1.1 * worst;  // headroom frozen with the calibration
}

BumpDecomposition decompose_bumps(const GridField& u, const CoefficientPair& pair, double R,
                                  double threshold) {
  const PeriodicGrid& g = u.grid;
  if (R < 1.0) throw ConfigError("decompose_bumps: R must be >= 1");
  if (!(threshold > 0.0)) throw ConfigError("decompose_bumps: threshold must be positive");

  BumpDecomposition dec;
  dec.total_energy = energy(u, pair).total;
  GridField work = u;

  for (;;) {
    // deterministic argmax: strictly larger wins, first index breaks ties
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < g.sites; ++i) {
      double a = std::fabs(work.values[i]);
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (best <= threshold) break;
    LatticePoint center = g.site(arg);
    for (const LatticePoint& c : dec.centers)
      if (torus_distance(center, c, g) < 2.0 * R) {
        std::ostringstream os;
        os << "bumps unresolved at this R: new peak at distance "
           << torus_distance(center, c, g) << " < 2R = " << 2.0 * R
           << " from an extracted center";
        throw CheckError(os.str());
      }
    GridField psi = cutoff_field(g, R, center);
    GridField profile(g);
    kernels::vmul(psi.data(), u.data(), profile.data(), g.sites);
    kernels::axpy(-1.0, profile.data(), work.data(), g.sites);
    dec.energies.push_back(energy(profile, pair).total);
    dec.centers.push_back(center);
    dec.profiles.push_back(std::move(profile));
  }

  GridField remainder = u;
  for (const GridField& p : dec.profiles)
    kernels::axpy(-1.0, p.data(), remainder.data(), g.sites);
  dec.remainder_norm = norm_EL(remainder, pair);

  dec.pairwise_distances.assign(dec.centers.size(), std::vector<double>(dec.centers.size(), 0.0));
  for (std::size_t i = 0; i < dec.centers.size(); ++i)
    for (std::size_t j = 0; j < dec.centers.size(); ++j)
      dec.pairwise_distances[i][j] = torus_distance(dec.centers[i], dec.centers[j], g);
  return dec;
}

double energy_splitting_check(const BumpDecomposition& dec, double total) {
  double s = 0.0;
  for (double e : dec.energies) s += e;
  return std::fabs(total - s);
}

DecayFit decay_fit(const GridField& u, const std::vector<LatticePoint>& centers, double R_min,
                   double R_max) {
  if (centers.empty()) throw ConfigError("decay_fit: needs at least one center");
  if (!(R_min >= 0.0) || !(R_max > R_min)) throw ConfigError("decay_fit: bad shell range");
  const PeriodicGrid& g = u.grid;

  DecayFit fit;
  // unit shells [r, r+1) starting at R_min, R_min+1, ..., R_max
  for (double r = R_min; r <= R_max + 1e-12; r += 1.0) {
    double m = 0.0;
    bool nonempty = false;
    for (std::size_t i = 0; i < g.sites; ++i) {
      double d = torus_distance_to_set(i, centers, g);
      if (d >= r && d < r + 1.0) {
        nonempty = true;
        m = std::max(m, std::fabs(u.values[i]));
      }
    }
    if (!nonempty) continue;
    if (m == 0.0) continue;  // zero shells are dropped
    fit.radii.push_back(r);
    fit.max_abs.push_back(m);
  }
  if (fit.radii.size() < 3)
    throw CheckError("decay_fit: fewer than 3 usable shells in [" + std::to_string(R_min) + ", " +
                     std::to_string(R_max) + "]");

  const std::size_t n = fit.radii.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = fit.radii[i], y = std::log(fit.max_abs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double den = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0, ybar = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    double y = std::log(fit.max_abs[i]);
    double yhat = fit.intercept + fit.slope * fit.radii[i];
    ss_res += (y - yhat) * (y - yhat);
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

double windowed_distance(const GridField& a, const CoefficientPair& pair_a, const GridField& b,
                         const std::vector<LatticePoint>& centers, double W) {
  const PeriodicGrid& ga = a.grid;
  const PeriodicGrid& gb = b.grid;
  if (ga.points_per_unit != gb.points_per_unit)
    throw ConfigError("windowed_distance: fields must share the lattice spacing");
  if (ga.dim != gb.dim) throw ConfigError("windowed_distance: dimension mismatch");

  GridField diff(ga);
  for (std::size_t i = 0; i < ga.sites; ++i) {
    LatticePoint k = ga.site(i);
    // same physical point on b's box: x = -L_a + k/M = -L_b + k_b/M
    LatticePoint kb;
    kb.fill(0);
    for (int d = 0; d < ga.dim; ++d)
      kb[d] = k[d] + (gb.halfwidth - ga.halfwidth) * ga.points_per_unit;
    diff.values[i] = a.values[i] - b.values[gb.index(kb)];
  }
  TorusMask window = ball_mask(ga, W, centers);
  return std::sqrt(masked_quadratic(diff, pair_a, window));
}

std::vector<CrossLRow> cross_L_stability(const CoefficientSpec& coeff, double R,
                                         const std::vector<std::array<double, 3>>& centers,
                                         int dim, const std::vector<int>& L_list,
                                         int points_per_unit, double window,
                                         const SolveOptions& opts) {
  std::vector<CrossLRow> rows;
  GridField prev;
  CoefficientPair prev_pair;
  std::vector<LatticePoint> prev_centers;
  bool have_prev = false;
  for (int L : L_list) {
    PeriodicGrid g = build_grid(dim, L, points_per_unit);
    CoefficientPair pair = sample_coefficients(g, coeff);
    GlueSpec spec;
    spec.R = R;
    for (const auto& c : centers) spec.centers.push_back(snap_point(c, g));
    MultibumpReport rep = solve_multibump(spec, pair, g, opts);
    CrossLRow row{L, rep.base.energy.total, 0.0};
    if (have_prev)
      row.distance_to_prev =
          windowed_distance(prev, prev_pair, rep.base.field, prev_centers, window);
    prev = rep.base.field;
    prev_pair = pair;
    prev_centers = spec.centers;
    have_prev = true;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace logschro
