#pragma once

#include <cstdint>
#include <utility>

#include "logschro/grid.hpp"

// The discrete energy J(u) = 1/2 ||u||^2 - int Q G(u), its derivative, the
// fibering-map projection onto the natural constraint set, and the
// annulus-restricted quantities used by the multibump machinery.

namespace logschro {

struct EnergyBreakdown {
  double quad = 0.0;   // 1/2 ||u||^2
  double hpart = 0.0;  // int Q H(u)
  double fpart = 0.0;  // int Q F(u)
  double total = 0.0;  // quad + hpart - fpart
  double mass = 0.0;   // 1/2 int Q u^2
};

EnergyBreakdown energy(const GridField& u, const CoefficientPair& pair);

// pointwise -Lap(u) + V u - Q g(u); the L2 gradient of the energy up to the
// quadrature weight
GridField residual(const GridField& u, const CoefficientPair& pair);

// directional derivative <u,v> - int Q g(u) v h^N
double deriv(const GridField& u, const GridField& v, const CoefficientPair& pair);

struct NehariResult {
  enum class Method { closed_form, bisection };
  double t = 1.0;
  double energy_at_t = 0.0;
  std::pair<double, double> bracket{1.0, 1.0};
  Method method = Method::closed_form;
};

// unique t > 0 with d/dt J(t u) = 0; closed form for nonnegative u, bisection
// otherwise. Requires a positive part.
NehariResult nehari_scale(const GridField& u, const CoefficientPair& pair,
                          bool force_bisection = false);

// squared masked quadratic form: sum over masked sites/edges of
// |grad u|^2 + V u^2, edges counted when both endpoints are inside
double masked_quadratic(const GridField& u, const CoefficientPair& pair, const TorusMask& mask);
double annular_norm(const GridField& u, const CoefficientPair& pair, const TorusMask& mask);
double annular_energy(const GridField& u, const CoefficientPair& pair, const TorusMask& mask);

struct R0Calibration {
  double r0 = 1e-2;
  bool fallback = false;  // search exhausted, conservative default returned
  int samples = 0;
};

// Largest dyadic r0 in (0,1] such that, over seeded random fields u with
// masked norm <= 2 r0 on every mask of the family, the annular coercivity and
// the superquadratic-part smallness both hold with margin.
R0Calibration calibrate_r0(const CoefficientPair& pair, const std::vector<TorusMask>& mask_family,
                           std::uint64_t seed = 42, int nsamples = 1000);

}  // namespace logschro
