#include "logschro/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace logschro::nonlin {

namespace {
inline void require_finite(double s) {
  if (!std::isfinite(s)) throw std::domain_error("nonlinearity: non-finite input");
}

// log(s^2) without the underflow of s*s for |s| below ~1.5e-154
inline double log_sq(double s) {
  double s2 = s * s;
  return s2 >= 2.2250738585072014e-308 ? std::log(s2) : 2.0 * std::log(std::fabs(s));
}
}  // namespace

double h(double s) {
  require_finite(s);
  if (std::fabs(s) <= kInvE) {
    if (s == 0.0) return 0.0;  // removable singularity of s*log(s^2)
    return -s * log_sq(s);
  }
  return s > 0.0 ? kTwoInvE : -kTwoInvE;
}

double f(double s) {
  require_finite(s);
  if (s <= kInvE) return 0.0;
  return kTwoInvE + s * log_sq(s);
}

double g(double s) {
  require_finite(s);
  if (s >= -kInvE) {
    if (s == 0.0) return 0.0;
    return s * log_sq(s);
  }
  return kTwoInvE;
}

double H(double s) {
  require_finite(s);
  double a = std::fabs(s);
  if (a <= kInvE) {
    if (s == 0.0) return 0.0;
    double s2 = s * s;
    return -0.5 * s2 * log_sq(s) + 0.5 * s2;
  }
  return kTwoInvE * a - kHalfInvE2;
}

double F(double s) {
  require_finite(s);
  if (s <= kInvE) return 0.0;
  double s2 = s * s;
  return 0.5 * s2 * log_sq(s) - 0.5 * s2 + kTwoInvE * s - kHalfInvE2;
}

double G(double s) { return -H(s) + F(s); }

double g_prime(double s) {
  require_finite(s);
  return log_sq(s) + 2.0;
}

}  // namespace logschro::nonlin
