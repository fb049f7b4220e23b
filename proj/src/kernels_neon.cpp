#include <arm_neon.h>

#include <cstddef>

#include "kernels_internal.hpp"
#include "logschro/kernels.hpp"

// NEON variants (2-wide f64). Two vector accumulators emulate the fixed
// 4-lane reduction shape, so results stay bitwise identical to the scalar
// reference and the AVX2 variant.

namespace logschro::kernels::detail {

namespace neon {

void axpy(double a, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0, n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    float64x2_t vx = vld1q_f64(x + i);
    vst1q_f64(y + i, vaddq_f64(vy, vmulq_f64(va, vx)));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0, n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    float64x2_t vx = vld1q_f64(x + i);
    vst1q_f64(y + i, vaddq_f64(vx, vmulq_f64(va, vy)));
  }
  for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void scal(double a, double* x, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0, n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0, n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void add2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0, n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) {
    float64x2_t s = vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), s));
  }
  for (; i < n; ++i) out[i] = out[i] + (a[i] + b[i]);
}

void stencil_row(const double* u, double* out, std::size_t n) {
  out[0] = u[n - 1] + u[1];
  std::size_t j = 1;
  if (n >= 4) {
    std::size_t last = n - 1;
    for (; j + 2 <= last; j += 2)
      vst1q_f64(out + j, vaddq_f64(vld1q_f64(u + j - 1), vld1q_f64(u + j + 1)));
  }
  for (; j + 1 < n; ++j) out[j] = u[j - 1] + u[j + 1];
  out[n - 1] = u[n - 2] + u[0];
}

void finish_lap(const double* u, double two_n, double inv_h2, double* out, std::size_t n) {
  float64x2_t vt = vdupq_n_f64(two_n);
  float64x2_t vh = vdupq_n_f64(inv_h2);
  std::size_t i = 0, n2 = n & ~std::size_t(1);
  for (; i < n2; i += 2) {
    float64x2_t vo = vld1q_f64(out + i);
    float64x2_t vu = vld1q_f64(u + i);
    vst1q_f64(out + i, vmulq_f64(vsubq_f64(vo, vmulq_f64(vt, vu)), vh));
  }
  for (; i < n; ++i) out[i] = (out[i] - two_n * u[i]) * inv_h2;
}

inline double combine4(float64x2_t a01, float64x2_t a23, const double* tail) {
  double l0 = vgetq_lane_f64(a01, 0) + tail[0];
  double l1 = vgetq_lane_f64(a01, 1) + tail[1];
  double l2 = vgetq_lane_f64(a23, 0) + tail[2];
  double l3 = vgetq_lane_f64(a23, 1) + tail[3];
  return (l0 + l1) + (l2 + l3);
}

double block_sum(const double* x, std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    a01 = vaddq_f64(a01, vld1q_f64(x + i));
    a23 = vaddq_f64(a23, vld1q_f64(x + i + 2));
  }
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += x[i];
  return combine4(a01, a23, tail);
}

double block_dot(const double* x, const double* y, std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    a01 = vaddq_f64(a01, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    a23 = vaddq_f64(a23, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += x[i] * y[i];
  return combine4(a01, a23, tail);
}

double block_wdot(const double* x, const double* y, const double* w, std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    float64x2_t xy0 = vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    float64x2_t xy2 = vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    a01 = vaddq_f64(a01, vmulq_f64(xy0, vld1q_f64(w + i)));
    a23 = vaddq_f64(a23, vmulq_f64(xy2, vld1q_f64(w + i + 2)));
  }
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += (x[i] * y[i]) * w[i];
  return combine4(a01, a23, tail);
}

double block_diff_dot(const double* a2, const double* a1, const double* b2, const double* b1,
                      std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    float64x2_t da0 = vsubq_f64(vld1q_f64(a2 + i), vld1q_f64(a1 + i));
    float64x2_t db0 = vsubq_f64(vld1q_f64(b2 + i), vld1q_f64(b1 + i));
    float64x2_t da2 = vsubq_f64(vld1q_f64(a2 + i + 2), vld1q_f64(a1 + i + 2));
    float64x2_t db2 = vsubq_f64(vld1q_f64(b2 + i + 2), vld1q_f64(b1 + i + 2));
    a01 = vaddq_f64(a01, vmulq_f64(da0, db0));
    a23 = vaddq_f64(a23, vmulq_f64(da2, db2));
  }
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += (a2[i] - a1[i]) * (b2[i] - b1[i]);
  return combine4(a01, a23, tail);
}

}  // namespace neon

const VTable& neon_table() {
  static const VTable t = {neon::axpy,        neon::xpay,      neon::scal,
                           neon::vmul,        neon::add2,      neon::stencil_row,
                           neon::finish_lap,  neon::block_sum, neon::block_dot,
                           neon::block_wdot,  neon::block_diff_dot};
  return t;
}

}  // namespace logschro::kernels::detail
