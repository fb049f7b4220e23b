#pragma once

// Test-only oracles, independent of the library's implementation paths:
// adaptive quadrature, the closed-form constant-coefficient solution, and
// random field generators.

#include <cmath>
#include <functional>
#include <random>

#include "logschro/grid.hpp"

namespace oracle {

// adaptive Simpson quadrature
inline double simpson(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, double whole, int depth) {
  double c = 0.5 * (a + b);
  double left = simpson(f, a, c), right = simpson(f, c, b);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, c, 0.5 * eps, left, depth - 1) +
         adaptive_simpson(f, c, b, 0.5 * eps, right, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-12) {
  return adaptive_simpson(f, a, b, eps, simpson(f, a, b), 60);
}

// half of exp(2) * sqrt(pi), frozen from a 30-digit computation
inline constexpr double kGaussonLevel1D = 6.548380468553260;
inline constexpr double kGaussonMass1D = 13.096760937106521;  // exp(2) sqrt(pi)
inline constexpr double kGaussonLevel2D = 31.550287620646458; // exp(3) pi / 2

// exact positive solution for constant V, Q, sampled on the torus
inline logschro::GridField gausson(const logschro::PeriodicGrid& g, double V = 1.0, double Q = 1.0) {
  logschro::GridField u(g);
  double alpha = (g.dim * Q + V) / (2.0 * Q);
  logschro::LatticePoint origin = logschro::origin_point(g);
  for (std::size_t i = 0; i < g.sites; ++i) {
    double d = logschro::torus_distance(g.site(i), origin, g);
    u.values[i] = std::exp(alpha - 0.5 * Q * d * d);
  }
  return u;
}

// smooth strictly positive random field, bounded into [lo, lo + span]
inline logschro::GridField smooth_positive_field(const logschro::PeriodicGrid& g,
                                                 std::mt19937_64& rng, double lo = 0.5,
                                                 double span = 2.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  logschro::GridField u(g);
  const int modes = 3;
  std::vector<double> amp(g.dim * modes), phase(g.dim * modes);
  for (double& a : amp) a = unit(rng);
  for (double& p : phase) p = 2.0 * M_PI * unit(rng);
  double norm = 0.0;
  for (double a : amp) norm += std::fabs(a);
  for (std::size_t i = 0; i < g.sites; ++i) {
    auto x = g.position(i);
    double s = 0.0;
    for (int d = 0; d < g.dim; ++d)
      for (int m = 0; m < modes; ++m)
        s += amp[d * modes + m] *
             std::cos(2.0 * M_PI * (m + 1) * (x[d] + g.halfwidth) / (2.0 * g.halfwidth) +
                      phase[d * modes + m]);
    u.values[i] = lo + span * 0.5 * (1.0 + s / norm);
  }
  return u;
}

// smooth random field with both signs
inline logschro::GridField smooth_field(const logschro::PeriodicGrid& g, std::mt19937_64& rng,
                                        double scale = 1.0) {
  logschro::GridField u = smooth_positive_field(g, rng, -1.0, 2.0);
  for (double& v : u.values) v *= scale;
  return u;
}

}  // namespace oracle
