#include "logschro/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "logschro/errors.hpp"
#include "logschro/kernels.hpp"
#include "logschro/nonlinearity.hpp"

namespace logschro {

namespace {

double l2(const GridField& r) {
  return std::sqrt(kernels::dot(r.data(), r.data(), r.size()) * r.grid.cell_volume());
}

// out = (-Lap + V) u
GridField apply_helmholtz(const GridField& u, const CoefficientPair& pair) {
  GridField lap = apply_laplacian(u);
  GridField out(u.grid);
  kernels::vmul(pair.V.data(), u.data(), out.data(), u.size());
  kernels::axpy(-1.0, lap.data(), out.data(), u.size());
  return out;
}

// diagonal of the linearization: V - Q g'(u), with g' frozen at 1e-12 below it
GridField jacobian_diag(const GridField& u, const CoefficientPair& pair) {
  GridField d(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = std::max(u.values[i], 1e-12);
    d.values[i] = pair.V.values[i] - pair.Q.values[i] * nonlin::g_prime(s);
  }
  return d;
}

GridField apply_jacobian(const GridField& diag, const GridField& v) {
  GridField lap = apply_laplacian(v);
  GridField out(v.grid);
  kernels::vmul(diag.data(), v.data(), out.data(), v.size());
  kernels::axpy(-1.0, lap.data(), out.data(), v.size());
  return out;
}

void project_positive_part(GridField& u) {
  for (double& v : u.values)
    if (v < 0.0) v = 0.0;
}

}  // namespace

namespace {

// symmetric Gauss-Seidel application of M^{-1} for A = -Lap + V; the sweeps
// are sequential and deterministic
GridField sgs_apply(const GridField& r, const CoefficientPair& pair) {
  const PeriodicGrid& g = r.grid;
  const std::size_t n = g.sites;
  const std::size_t ext = static_cast<std::size_t>(g.extent);
  const double inv_h2 = static_cast<double>(g.points_per_unit) * g.points_per_unit;
  const double d0 = 2.0 * g.dim * inv_h2;
  const double* rv = r.data();
  const double* Vv = pair.V.data();

  // strides per axis (last axis contiguous); extent is the same on every axis
  std::size_t stride[3] = {0, 0, 0};
  {
    std::size_t s = 1;
    for (int d = g.dim - 1; d >= 0; --d) {
      stride[d] = s;
      s *= ext;
    }
  }

  // forward: (D + L) z = r, collecting only neighbors with smaller flat index;
  // wrap neighbors flip between the lower and upper triangle
  GridField z(g);
  double* zv = z.data();
  {
    LatticePoint k{0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      double acc = rv[i];
      for (int d = 0; d < g.dim; ++d) {
        std::size_t s = stride[d];
        if (k[d] > 0) acc += inv_h2 * zv[i - s];  // minus neighbor, lower
        if (k[d] == static_cast<int>(ext) - 1)
          acc += inv_h2 * zv[i - s * (ext - 1)];  // wrap plus neighbor, lower
      }
      zv[i] = acc / (d0 + Vv[i]);
      int d = g.dim - 1;
      while (d >= 0 && ++k[d] == static_cast<int>(ext)) k[d--] = 0;
    }
  }
  // backward: (D + U) y = D z
  GridField y(g);
  double* yv = y.data();
  {
    LatticePoint k{0, 0, 0};
    for (int d = 0; d < g.dim; ++d) k[d] = static_cast<int>(ext) - 1;
    for (std::size_t i = n; i-- > 0;) {
      double di = d0 + Vv[i];
      double acc = zv[i] * di;
      for (int d = 0; d < g.dim; ++d) {
        std::size_t s = stride[d];
        if (k[d] < static_cast<int>(ext) - 1)
          acc += inv_h2 * yv[i + s];  // plus neighbor, upper
        if (k[d] == 0) acc += inv_h2 * yv[i + s * (ext - 1)];  // wrap minus neighbor, upper
      }
      yv[i] = acc / di;
      int d = g.dim - 1;
      while (d >= 0 && --k[d] < 0) k[d--] = static_cast<int>(ext) - 1;
    }
  }
  return y;
}

}  // namespace

namespace {

// preconditioner application: symmetric Gauss-Seidel with one refinement
// step, z = P r + P (r - A P r); symmetric and positive definite since the
// SGS iteration is convergent for this operator
GridField prec_apply(const GridField& r, const CoefficientPair& pair) {
  GridField z = sgs_apply(r, pair);
  GridField t = apply_helmholtz(z, pair);
  GridField d = r;
  kernels::axpy(-1.0, t.data(), d.data(), d.size());
  GridField z2 = sgs_apply(d, pair);
  kernels::axpy(1.0, z2.data(), z.data(), z.size());
  return z;
}

}  // namespace

GridField precondition(const GridField& rhs, const CoefficientPair& pair) {
  require_same_grid(rhs, pair.V, "precondition");
  const std::size_t n = rhs.size();
  double bnorm = std::sqrt(kernels::dot(rhs.data(), rhs.data(), n));
  GridField x(rhs.grid);
  if (bnorm == 0.0) return x;
  GridField r = rhs;
  GridField z = prec_apply(r, pair);
  GridField p = z;
  double rz = kernels::dot(r.data(), z.data(), n);
  const double tol = 1e-10 * bnorm;
  const int cap = static_cast<int>(10.0 * std::sqrt(static_cast<double>(n)));
  for (int it = 0; it < cap; ++it) {
    GridField Ap = apply_helmholtz(p, pair);
    double pAp = kernels::dot(p.data(), Ap.data(), n);
    double alpha = rz / pAp;
    kernels::axpy(alpha, p.data(), x.data(), n);
    kernels::axpy(-alpha, Ap.data(), r.data(), n);
    if (std::sqrt(kernels::dot(r.data(), r.data(), n)) <= tol) return x;
    z = prec_apply(r, pair);
    double rz_new = kernels::dot(r.data(), z.data(), n);
    kernels::xpay(z.data(), rz_new / rz, p.data(), n);
    rz = rz_new;
  }
  throw SolverError("precondition: conjugate gradients did not reach 1e-10 within 10*sqrt(sites) iterations");
}

namespace {

// MINRES for symmetric (possibly indefinite) operators, x0 = 0
template <class Apply>
MinresResult minres(Apply&& A, const GridField& b, double rel_tol, int max_iter) {
  const std::size_t n = b.size();
  MinresResult out{GridField(b.grid), 1.0, 0, false};
  double beta1 = std::sqrt(kernels::dot(b.data(), b.data(), n));
  if (beta1 == 0.0) {
    out.converged = true;
    out.relative_residual = 0.0;
    return out;
  }
  GridField v_prev(b.grid);
  GridField v = b;
  kernels::scal(1.0 / beta1, v.data(), n);
  GridField w(b.grid), w_prev(b.grid);
  double gamma1 = 1.0, gamma0 = 1.0, sigma1 = 0.0, sigma0 = 0.0;
  double eta = beta1, beta = beta1;

  for (int k = 1; k <= max_iter; ++k) {
    GridField Av = A(v);
    double alpha = kernels::dot(v.data(), Av.data(), n);
    kernels::axpy(-alpha, v.data(), Av.data(), n);
    if (k > 1) kernels::axpy(-beta, v_prev.data(), Av.data(), n);
    double beta_next = std::sqrt(kernels::dot(Av.data(), Av.data(), n));

    double delta = gamma1 * alpha - gamma0 * sigma1 * beta;
    double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
    double rho2 = sigma1 * alpha + gamma0 * gamma1 * beta;
    double rho3 = sigma0 * beta;
    double gamma_next = delta / rho1;
    double sigma_next = beta_next / rho1;

    // w_new = (v - rho3 w_prev - rho2 w) / rho1
    GridField w_new = v;
    kernels::axpy(-rho3, w_prev.data(), w_new.data(), n);
    kernels::axpy(-rho2, w.data(), w_new.data(), n);
    kernels::scal(1.0 / rho1, w_new.data(), n);
    kernels::axpy(gamma_next * eta, w_new.data(), out.x.data(), n);

    eta = -sigma_next * eta;
    out.iterations = k;
    out.relative_residual = std::fabs(eta) / beta1;
    if (out.relative_residual <= rel_tol) {
      out.converged = true;
      return out;
    }
    if (beta_next <= 1e-300 * beta1) {  // Krylov space exhausted
      out.converged = true;
      return out;
    }
    w_prev = std::move(w);
    w = std::move(w_new);
    v_prev = std::move(v);
    v = std::move(Av);
    kernels::scal(1.0 / beta_next, v.data(), n);
    gamma0 = gamma1;
    gamma1 = gamma_next;
    sigma0 = sigma1;
    sigma1 = sigma_next;
    beta = beta_next;
  }
  return out;
}

struct NewtonStep {
  bool accepted = false;
  GridField u_new;
  GridField r_new;
  double rl2_new = 0.0;
  double sigma = 1.0;
};

NewtonStep damped_newton_step(const GridField& u, const CoefficientPair& pair,
                              const GridField& r_field, double rl2, double trust_el) {
  const std::size_t n = u.size();
  GridField diag = jacobian_diag(u, pair);
  GridField rhs = r_field;
  kernels::scal(-1.0, rhs.data(), n);
  int cap = static_cast<int>(std::min<double>(static_cast<double>(n),
                                              10.0 * std::sqrt(static_cast<double>(n)) + 200.0));
  MinresResult lin = minres([&](const GridField& v) { return apply_jacobian(diag, v); }, rhs, 1e-6, cap);
  GridField s = std::move(lin.x);
  if (trust_el > 0.0) {
    double ns = norm_EL(s, pair);
    if (ns > trust_el) kernels::scal(trust_el / ns, s.data(), n);
  }
  NewtonStep out;
  double sigma = 1.0;
  for (int bt = 0; bt < 24; ++bt, sigma *= 0.5) {
    GridField u_try = u;
    kernels::axpy(sigma, s.data(), u_try.data(), n);
    GridField r_try = residual(u_try, pair);
    double rl2_try = l2(r_try);
    if (rl2_try <= (1.0 - 1e-4 * sigma) * rl2) {
      out.accepted = true;
      out.u_new = std::move(u_try);
      out.r_new = std::move(r_try);
      out.rl2_new = rl2_try;
      out.sigma = sigma;
      return out;
    }
  }
  return out;
}

// Restores strict positivity at dead-tail sites with per-site relative
// accuracy: each nonpositive site is replaced by the positive root of its own
// stencil equation, swept forward then backward so positivity propagates from
// the cores.
void positivity_sweeps(GridField& u, const CoefficientPair& pair, int nsweeps = 2) {
  const PeriodicGrid& g = u.grid;
  const double inv_h2 = static_cast<double>(g.points_per_unit) * g.points_per_unit;
  const double A0 = 2.0 * g.dim * inv_h2;
  auto fix_site = [&](std::size_t i) {
    if (u.values[i] > 0.0) return;
    LatticePoint k = g.site(i);
    double m = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      LatticePoint kp = k, km = k;
      kp[d] = k[d] + 1;
      km[d] = k[d] - 1;
      m += u.values[g.index(kp)] + u.values[g.index(km)];
    }
    m *= inv_h2;
    if (!(m > 0.0)) {
      u.values[i] = 0.0;
      return;
    }
    const double A = A0 + pair.V.values[i];
    const double Qi = pair.Q.values[i];
    double s = m / A;
    for (int it = 0; it < 80; ++it) {
      double phi = s * A - Qi * nonlin::g(s) - m;
      double dphi = A - Qi * nonlin::g_prime(std::max(s, 1e-300));
      double snew = s - phi / dphi;
      if (snew <= 0.0) snew = 0.5 * s;
      if (std::fabs(snew - s) <= 1e-14 * s) {
        s = snew;
        break;
      }
      s = snew;
    }
    u.values[i] = s;
  };
  for (int sweep = 0; sweep < nsweeps; ++sweep) {
    for (std::size_t i = 0; i < g.sites; ++i) fix_site(i);
    for (std::size_t i = g.sites; i-- > 0;) fix_site(i);
  }
}

GridField initial_bump(const PeriodicGrid& grid) {
  GridField u(grid);
  LatticePoint origin = origin_point(grid);
  for (std::size_t i = 0; i < grid.sites; ++i) {
    double d = torus_distance(grid.site(i), origin, grid);
    u.values[i] = std::exp(-0.5 * d * d);
  }
  return u;
}

void finalize_report(SolveReport& rep, const CoefficientPair& pair, const SolveOptions& opts) {
  GridField& u = rep.field;
  if (kernels::min_value(u.data(), u.size()) <= 0.0) {
    positivity_sweeps(u, pair);
    rep.note += "positivity sweeps applied; ";
  }
  GridField r = residual(u, pair);
  rep.residual_l2 = l2(r);
  rep.residual_sup = kernels::max_abs(r.data(), r.size());
  rep.energy = energy(u, pair);
  rep.identity_gap = std::fabs(rep.energy.total - rep.energy.mass);
  rep.positivity_min = kernels::min_value(u.data(), u.size());
  rep.nehari_t = nehari_scale(u, pair).t;
  rep.converged = rep.residual_l2 <= opts.tol &&
                  rep.identity_gap <= 1e-6 * (1.0 + rep.energy.mass) && rep.positivity_min > 0.0;
}

}  // namespace

SolveReport ground_state(const CoefficientPair& pair, const PeriodicGrid& grid,
                         const SolveOptions& opts) {
  if (!(pair.V.grid == grid)) throw ConfigError("ground_state: coefficient grid mismatch");
  if (kernels::min_value(pair.V.data(), grid.sites) <= 0.0)
    throw ConfigError("ground_state: min V must be positive (normalize the potential first)");
  if (kernels::min_value(pair.Q.data(), grid.sites) <= 0.0)
    throw ConfigError("ground_state: min Q must be positive");

  SolveReport rep;
  GridField u = initial_bump(grid);
  {
    NehariResult nr = nehari_scale(u, pair);
    kernels::scal(nr.t, u.data(), u.size());
  }
  double J_prev = energy(u, pair).total;
  bool clamp_used = false;
  int newton_cooldown = 0;     // descent steps to take before retrying newton
  int energy_increases = 0;
  int stall_retries = 0;
  bool converged = false;
  int it = 0;

  GridField r = residual(u, pair);
  double rl2 = l2(r);

  const bool debug = std::getenv("LOGSCHRO_DEBUG") != nullptr;
  for (it = 1; it <= opts.max_iter; ++it) {
    rep.trace.push_back({it, J_prev, rl2});
    if (debug)
      std::fprintf(stderr, "it=%4d J=%.12f rl2=%.3e min=%.3e cooldown=%d\n", it, J_prev, rl2,
                   kernels::min_value(u.data(), u.size()), newton_cooldown);
    if (rl2 <= opts.tol) {
      converged = true;
      break;
    }

    bool stepped = false;
    if (newton_cooldown == 0 && rl2 < opts.newton_switch) {
      NewtonStep ns = damped_newton_step(u, pair, r, rl2, 0.0);
      if (ns.accepted) {
        double J_new = energy(ns.u_new, pair).total;
        // a genuine divergence raises the energy at a visible scale; tiny
        // increases are normal while approaching the saddle from below
        if (J_new > J_prev + 1e-6 * (1.0 + std::fabs(J_prev))) {
          if (++energy_increases >= 2) {
            newton_cooldown = 5;
            energy_increases = 0;
            rep.note += "newton paused after two energy increases; ";
          }
        }
        u = std::move(ns.u_new);
        r = std::move(ns.r_new);
        rl2 = ns.rl2_new;
        J_prev = J_new;
        stepped = true;
      } else {
        newton_cooldown = 5;
        rep.note += "newton stalled, continuing with descent; ";
      }
    }

    if (!stepped) {
      GridField w = precondition(r, pair);
      double slope = kernels::dot(r.data(), w.data(), u.size()) * grid.cell_volume();
      double sigma = 1.0;
      bool accepted = false;
      GridField u_new(grid);
      double J_new = 0.0;
      while (sigma >= 1e-14) {
        u_new = u;
        kernels::axpy(-sigma, w.data(), u_new.data(), u.size());
        if (kernels::max_value(u_new.data(), u_new.size()) > 0.0) {
          NehariResult nr = nehari_scale(u_new, pair);
          kernels::scal(nr.t, u_new.data(), u_new.size());
          J_new = energy(u_new, pair).total;
          if (J_new <= J_prev - 1e-4 * sigma * slope) {
            accepted = true;
            break;
          }
        }
        sigma *= 0.5;
      }
      if (!accepted) {
        // the energy cannot resolve steps below its own rounding; hand the
        // endgame back to newton unless that already failed repeatedly
        if (newton_cooldown > 0 && stall_retries < 3) {
          ++stall_retries;
          newton_cooldown = 0;
          continue;
        }
        throw SolverError("ground_state: line search stalled at residual_l2 = " + std::to_string(rl2));
      }
      if (newton_cooldown > 0) --newton_cooldown;
      u = std::move(u_new);
      J_prev = J_new;
      r = residual(u, pair);
      rl2 = l2(r);
    }

    // Positivity monitor, active in the polish regime. During the global
    // descent phase the far tail oscillates around zero at scales invisible
    // to the energy; the truncated nonlinearity itself damps those.
    if (rl2 < opts.newton_switch) {
      double pm = kernels::min_value(u.data(), u.size());
      if (pm < -1e-8) {
        if (clamp_used)
          throw SolverError("ground_state: iterate lost positivity twice (min = " +
                            std::to_string(pm) + ")");
        project_positive_part(u);
        clamp_used = true;
        rep.note += "negative undershoot clamped once; ";
        r = residual(u, pair);
        rl2 = l2(r);
      }
    }
  }

  if (!converged)
    throw SolverError("ground_state: no convergence after " + std::to_string(opts.max_iter) +
                      " iterations (residual_l2 = " + std::to_string(rl2) + ")");

  rep.field = std::move(u);
  rep.iterations = it;
  finalize_report(rep, pair, opts);
  return rep;
}

std::vector<BLevelRow> b_of_L(const CoefficientSpec& coeff, int dim, const std::vector<int>& L_list,
                              int points_per_unit, const SolveOptions& opts, int threads) {
  std::vector<BLevelRow> rows(L_list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= L_list.size()) return;
      PeriodicGrid g = build_grid(dim, L_list[i], points_per_unit);
      CoefficientPair pair = sample_coefficients(g, coeff);
      SolveReport rep = ground_state(pair, g, opts);
      rows[i] = {L_list[i], rep.energy.total};
    }
  };
  int nw = std::max(1, std::min<int>(threads, static_cast<int>(L_list.size())));
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

void GlueSpec::validate(const PeriodicGrid& grid, std::size_t min_centers) const {
  if (centers.size() < min_centers)
    throw ConfigError("glue: needs at least " + std::to_string(min_centers) + " centers");
  if (R < 1.0) throw ConfigError("glue: R must be >= 1");
  if (2.0 * R > grid.halfwidth)
    throw ConfigError("glue: cutoff support needs 2R <= L (R = " + std::to_string(R) +
                      ", L = " + std::to_string(grid.halfwidth) + ")");
  if (!source_shifts.empty() && source_shifts.size() != centers.size())
    throw ConfigError("glue: source_shifts must match centers");
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      double d = torus_distance(centers[i], centers[j], grid);
      if (d < 5.0 * R) {
        std::ostringstream os;
        os << "glue: centers " << i << " and " << j << " are " << d
           << " apart; the separation rule requires 5R = " << 5.0 * R << " <= separation";
        throw ConfigError(os.str());
      }
    }
}

GridField glue(const GlueSpec& spec, const GridField& ground) {
  spec.validate(ground.grid, 1);
  const PeriodicGrid& grid = ground.grid;
  LatticePoint origin = origin_point(grid);
  GridField psi = cutoff_field(grid, spec.R, origin);
  GridField out(grid);
  for (std::size_t k = 0; k < spec.centers.size(); ++k) {
    GridField base = ground;
    if (!spec.source_shifts.empty()) {
      LatticePoint s = spec.source_shifts[k];
      for (int d = 0; d < grid.dim; ++d) s[d] *= grid.points_per_unit;
      base = translate(ground, s);
    }
    GridField windowed(grid);
    kernels::vmul(psi.data(), base.data(), windowed.data(), grid.sites);
    LatticePoint shift{0, 0, 0};
    for (int d = 0; d < grid.dim; ++d) shift[d] = spec.centers[k][d] - origin[d];
    GridField placed = translate(windowed, shift);
    kernels::axpy(1.0, placed.data(), out.data(), grid.sites);
  }
  return out;
}

GridField annulus_minimize(const GridField& u, const CoefficientPair& pair, const TorusMask& mask,
                           double r0, double rho, const GridField* init) {
  require_same_grid(u, pair.V, "annulus_minimize");
  if (!(mask.grid == u.grid)) throw ConfigError("annulus_minimize: mask grid mismatch");
  if (!(rho < 0.25 * r0 * r0))
    throw ConfigError("annulus_minimize: needs rho < r0^2/4 (rho = " + std::to_string(rho) +
                      ", r0 = " + std::to_string(r0) + ")");
  double nrm = annular_norm(u, pair, mask);
  if (nrm > r0)
    throw ConfigError("annulus_minimize: annular norm " + std::to_string(nrm) + " exceeds r0 = " +
                      std::to_string(r0));
  double ja = annular_energy(u, pair, mask);
  if (ja > rho)
    throw ConfigError("annulus_minimize: annular energy " + std::to_string(ja) +
                      " exceeds the budget rho = " + std::to_string(rho));

  const PeriodicGrid& g = u.grid;
  const std::size_t n = g.sites;
  GridField v = u;
  if (init) {
    require_same_grid(*init, u, "annulus_minimize(init)");
    for (std::size_t i = 0; i < n; ++i)
      if (mask.inside[i]) v.values[i] = init->values[i];
  }

  auto masked = [&](GridField f) {
    for (std::size_t i = 0; i < n; ++i)
      if (!mask.inside[i]) f.values[i] = 0.0;
    return f;
  };

  const double tol = 1e-12 * (1.0 + norm_EL(u, pair));
  double prev_rl2 = std::numeric_limits<double>::infinity();
  for (int newton = 0; newton < 60; ++newton) {
    GridField rm = masked(residual(v, pair));
    double rml2 = l2(rm);
    if (rml2 <= tol) return v;
    if (rml2 >= prev_rl2 && newton > 5)
      throw SolverError("annulus_minimize: masked residual stopped decreasing (r0 calibration failure?)");
    prev_rl2 = rml2;

    GridField diag = jacobian_diag(v, pair);
    auto apply = [&](const GridField& d) { return masked(apply_jacobian(diag, masked(d))); };

    // CG on the masked, SPD-in-the-small-regime system
    GridField x(g);
    GridField r = rm;
    kernels::scal(-1.0, r.data(), n);
    GridField p = r;
    double rs = kernels::dot(r.data(), r.data(), n);
    double b0 = std::sqrt(rs);
    int cap = static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 100;
    for (int itcg = 0; itcg < cap; ++itcg) {
      GridField Ap = apply(p);
      double pAp = kernels::dot(p.data(), Ap.data(), n);
      if (!(pAp > 0.0))
        throw SolverError("annulus_minimize: lost convexity in the annulus (r0 calibration failure)");
      double alpha = rs / pAp;
      kernels::axpy(alpha, p.data(), x.data(), n);
      kernels::axpy(-alpha, Ap.data(), r.data(), n);
      double rs_new = kernels::dot(r.data(), r.data(), n);
      if (std::sqrt(rs_new) <= 1e-10 * b0) break;
      kernels::xpay(r.data(), rs_new / rs, p.data(), n);
      rs = rs_new;
    }
    kernels::axpy(1.0, x.data(), v.data(), n);
  }
  throw SolverError("annulus_minimize: Newton did not converge in 60 iterations");
}

MultibumpReport solve_multibump(const GlueSpec& spec, const CoefficientPair& pair,
                                const PeriodicGrid& grid, const SolveOptions& opts,
                                const GridField* ground) {
  spec.validate(grid, 2);
  if (!(pair.V.grid == grid)) throw ConfigError("solve_multibump: coefficient grid mismatch");

  SolveReport ground_rep;
  GridField ground_field;
  if (ground) {
    ground_field = *ground;
  } else {
    ground_rep = ground_state(pair, grid, opts);
    ground_field = ground_rep.field;
  }
  double b_level = energy(ground_field, pair).total;

  TorusMask mask = annulus_mask(grid, spec.R, spec.centers);
  // calibration family: annuli at t = R/2, R, 2R (no separation recheck; the
  // glue spec already validated 5R)
  std::vector<TorusMask> family;
  for (double t : {0.5 * spec.R, spec.R, 2.0 * spec.R}) {
    TorusMask m;
    m.grid = grid;
    m.role = TorusMask::Role::annulus;
    m.inside.assign(grid.sites, 0);
    for (std::size_t i = 0; i < grid.sites; ++i)
      m.inside[i] = torus_distance_to_set(i, spec.centers, grid) >= t ? 1 : 0;
    family.push_back(std::move(m));
  }
  R0Calibration cal = calibrate_r0(pair, family, opts.seed);

  MultibumpReport rep;
  rep.r0 = cal.r0;
  double r = opts.r_attach > 0.0 ? opts.r_attach : 0.5 * cal.r0;
  double rho = opts.rho > 0.0 ? opts.rho : cal.r0 * cal.r0 / 8.0;
  if (!(rho < 0.25 * cal.r0 * cal.r0))
    throw ConfigError("solve_multibump: rho must stay below r0^2/4");
  rep.attach_radius = r;
  rep.annulus_budget = rho;
  rep.ground_level = b_level;
  if (cal.fallback) rep.base.note += "r0 calibration fell back to the conservative default; ";

  rep.glued = glue(spec, ground_field);
  GridField u = rep.glued;
  const double trust = r / 4.0;
  const std::size_t n = grid.sites;

  auto el_distance_to_glued = [&](const GridField& w) {
    GridField d = w;
    kernels::axpy(-1.0, rep.glued.data(), d.data(), n);
    return norm_EL(d, pair);
  };

  GridField r_field = residual(u, pair);
  double rl2 = l2(r_field);
  bool converged = false;
  int accepted = 0;
  int it = 0;
  for (it = 1; it <= opts.max_iter; ++it) {
    double drift = el_distance_to_glued(u);
    if (drift > 2.0 * r)
      throw SolverError("solve_multibump: iterate left the 2r neighborhood of the glued profile "
                        "(distance " + std::to_string(drift) + " > " + std::to_string(2.0 * r) +
                        "); candidate collapse to fewer bumps");
    rep.base.trace.push_back({it, energy(u, pair).total, rl2});
    if (rl2 <= opts.tol) {
      converged = true;
      break;
    }

    NewtonStep ns = damped_newton_step(u, pair, r_field, rl2, trust);
    if (!ns.accepted) {
      // merit-gradient fallback: descent on 1/2 ||residual||^2
      GridField diag = jacobian_diag(u, pair);
      GridField dir = apply_jacobian(diag, r_field);  // gradient of the merit
      double slope = kernels::dot(dir.data(), dir.data(), n) * grid.cell_volume();
      double sigma = 1.0 / (1.0 + kernels::max_abs(diag.data(), n));
      bool ok = false;
      while (sigma >= 1e-16) {
        GridField u_try = u;
        kernels::axpy(-sigma, dir.data(), u_try.data(), n);
        GridField r_try = residual(u_try, pair);
        double rl2_try = l2(r_try);
        if (0.5 * rl2_try * rl2_try <=
            0.5 * rl2 * rl2 - 1e-4 * sigma * slope) {
          u = std::move(u_try);
          r_field = std::move(r_try);
          rl2 = rl2_try;
          ok = true;
          break;
        }
        sigma *= 0.5;
      }
      if (!ok)
        throw SolverError("solve_multibump: stalled at residual_l2 = " + std::to_string(rl2));
    } else {
      u = std::move(ns.u_new);
      r_field = std::move(ns.r_new);
      rl2 = ns.rl2_new;
    }
    ++accepted;

    // stabilization pass: re-impose smallness off the bumps during the walk;
    // near the critical point the minimizer is a no-op up to boundary noise,
    // so it is skipped once the residual approaches the target
    if (accepted % opts.stabilize_every == 0 && rl2 > 100.0 * opts.tol) {
      double anorm = annular_norm(u, pair, mask);
      double ja = annular_energy(u, pair, mask);
      if (anorm > cal.r0 || ja > rho)
        throw SolverError("solve_multibump: annulus smallness lost (norm " + std::to_string(anorm) +
                          ", energy " + std::to_string(ja) +
                          "); separation too small for this grid");
      u = annulus_minimize(u, pair, mask, cal.r0, rho);
      r_field = residual(u, pair);
      rl2 = l2(r_field);
    }
  }

  if (!converged)
    throw SolverError("solve_multibump: no convergence after " + std::to_string(opts.max_iter) +
                      " iterations (residual_l2 = " + std::to_string(rl2) + ")");

  rep.base.field = std::move(u);
  rep.base.iterations = it;
  finalize_report(rep.base, pair, opts);

  rep.distance_to_glued = el_distance_to_glued(rep.base.field);
  rep.annulus_energy = annular_energy(rep.base.field, pair, mask);

  // per-bump energies on disjoint balls of radius half the minimal separation
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.centers.size(); ++i)
    for (std::size_t j = i + 1; j < spec.centers.size(); ++j)
      min_sep = std::min(min_sep, torus_distance(spec.centers[i], spec.centers[j], grid));
  double ball_r = 0.5 * min_sep;
  for (const LatticePoint& c : spec.centers) {
    TorusMask ball = ball_mask(grid, ball_r, {c});
    rep.bump_energies.push_back(annular_energy(rep.base.field, pair, ball));
  }

  double k = static_cast<double>(spec.centers.size());
  double alpha = 0.1 * b_level;
  rep.level_lo = k * b_level - alpha;
  rep.level_hi = k * b_level + alpha;
  rep.level_in_window = rep.base.energy.total >= rep.level_lo && rep.base.energy.total <= rep.level_hi;
  return rep;
}

}  // namespace logschro
