#include <immintrin.h>

#include <cstddef>

#include "kernels_internal.hpp"
#include "logschro/kernels.hpp"

// AVX2 variants. Each loop evaluates the same expression in the same order as
// the scalar reference (no FMA), so results are bitwise identical.

namespace logschro::kernels::detail {

namespace avx2 {

void axpy(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vx, _mm256_mul_pd(va, vy)));
  }
  for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void scal(double a, double* x, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void add2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), s));
  }
  for (; i < n; ++i) out[i] = out[i] + (a[i] + b[i]);
}

void stencil_row(const double* u, double* out, std::size_t n) {
  out[0] = u[n - 1] + u[1];
  std::size_t j = 1;
  if (n >= 6) {
    std::size_t last = n - 1;  // exclusive end of the vector range
    for (; j + 4 <= last; j += 4)
      _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(u + j - 1), _mm256_loadu_pd(u + j + 1)));
  }
  for (; j + 1 < n; ++j) out[j] = u[j - 1] + u[j + 1];
  out[n - 1] = u[n - 2] + u[0];
}

void finish_lap(const double* u, double two_n, double inv_h2, double* out, std::size_t n) {
  __m256d vt = _mm256_set1_pd(two_n);
  __m256d vh = _mm256_set1_pd(inv_h2);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d vo = _mm256_loadu_pd(out + i);
    __m256d vu = _mm256_loadu_pd(u + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(vo, _mm256_mul_pd(vt, vu)), vh));
  }
  for (; i < n; ++i) out[i] = (out[i] - two_n * u[i]) * inv_h2;
}

inline double combine_lanes(__m256d acc, const double* tail_lanes) {
  double l[4];
  _mm256_storeu_pd(l, acc);
  l[0] += tail_lanes[0];
  l[1] += tail_lanes[1];
  l[2] += tail_lanes[2];
  l[3] += tail_lanes[3];
  return (l[0] + l[1]) + (l[2] + l[3]);
}

double block_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += x[i];
  return combine_lanes(acc, tail);
}

double block_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += x[i] * y[i];
  return combine_lanes(acc, tail);
}

double block_wdot(const double* x, const double* y, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(xy, _mm256_loadu_pd(w + i)));
  }
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += (x[i] * y[i]) * w[i];
  return combine_lanes(acc, tail);
}

double block_diff_dot(const double* a2, const double* a1, const double* b2, const double* b1,
                      std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a2 + i), _mm256_loadu_pd(a1 + i));
    __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b2 + i), _mm256_loadu_pd(b1 + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(da, db));
  }
  double tail[4] = {0, 0, 0, 0};
  for (; i < n; ++i) tail[i & 3] += (a2[i] - a1[i]) * (b2[i] - b1[i]);
  return combine_lanes(acc, tail);
}

}  // namespace avx2

const VTable& avx2_table() {
  static const VTable t = {avx2::axpy,        avx2::xpay,      avx2::scal,
                           avx2::vmul,        avx2::add2,      avx2::stencil_row,
                           avx2::finish_lap,  avx2::block_sum, avx2::block_dot,
                           avx2::block_wdot,  avx2::block_diff_dot};
  return t;
}

}  // namespace logschro::kernels::detail
