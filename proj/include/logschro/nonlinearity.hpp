#pragma once

// Truncated logarithmic nonlinearity. The map s*log(s^2) is split at the
// threshold 1/e into a concave piece h (capped beyond the threshold) and a
// convex piece f (zero below it), with g = -h + f and primitives H, F,
// G = -H + F. Critical points of the energy built on G are nonnegative, which
// is the point of the truncation.

namespace logschro::nonlin {

// 1/e, 2/e and 1/(2e^2), written as literals so every branch formula uses the
// exact same doubles.
inline constexpr double kInvE = 0.36787944117144232159552377016146087;
inline constexpr double kTwoInvE = 2.0 * kInvE;
inline constexpr double kHalfInvE2 = 0.5 * kInvE * kInvE;

// h(s) = -s log s^2 for |s| <= 1/e, +-2/e beyond (sign of s).
double h(double s);
// f(s) = 0 for s <= 1/e, 2/e + s log s^2 beyond.
double f(double s);
// g(s) = -h(s) + f(s) = s log s^2 for s >= -1/e, 2/e below.
double g(double s);
// H(s) = integral of h: -s^2 log(s^2)/2 + s^2/2 inside, (2/e)|s| - 1/(2e^2) outside.
double H(double s);
// F(s) = integral of f: 0 for s <= 1/e, s^2 log(s^2)/2 - s^2/2 + (2/e)s - 1/(2e^2) beyond.
double F(double s);
// G(s) = -H(s) + F(s); collapses to s^2 log(s^2)/2 - s^2/2 for s >= 0.
double G(double s);
// g'(s) = log s^2 + 2 for s > 0. Callers clamp tiny arguments themselves.
double g_prime(double s);

}  // namespace logschro::nonlin
