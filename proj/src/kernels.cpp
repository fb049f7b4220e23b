#include "logschro/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "kernels_internal.hpp"

namespace logschro::kernels {

namespace detail {

// ---- scalar reference kernels -------------------------------------------

namespace ref {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void scal(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = a * x[i];
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void add2(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = out[i] + (a[i] + b[i]);
}

void stencil_row(const double* u, double* out, std::size_t n) {
  out[0] = u[n - 1] + u[1];
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = u[j - 1] + u[j + 1];
  out[n - 1] = u[n - 2] + u[0];
}

void finish_lap(const double* u, double two_n, double inv_h2, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (out[i] - two_n * u[i]) * inv_h2;
}

double block_sum(const double* x, std::size_t n) {
  double l[kLanes] = {0.0, 0.0, 0.0, 0.0};
  std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    l[0] += x[i];
    l[1] += x[i + 1];
    l[2] += x[i + 2];
    l[3] += x[i + 3];
  }
  for (std::size_t i = n4; i < n; ++i) l[i & 3] += x[i];
  return (l[0] + l[1]) + (l[2] + l[3]);
}

double block_dot(const double* x, const double* y, std::size_t n) {
  double l[kLanes] = {0.0, 0.0, 0.0, 0.0};
  std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    l[0] += x[i] * y[i];
    l[1] += x[i + 1] * y[i + 1];
    l[2] += x[i + 2] * y[i + 2];
    l[3] += x[i + 3] * y[i + 3];
  }
  for (std::size_t i = n4; i < n; ++i) l[i & 3] += x[i] * y[i];
  return (l[0] + l[1]) + (l[2] + l[3]);
}

double block_wdot(const double* x, const double* y, const double* w, std::size_t n) {
  double l[kLanes] = {0.0, 0.0, 0.0, 0.0};
  std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    l[0] += (x[i] * y[i]) * w[i];
    l[1] += (x[i + 1] * y[i + 1]) * w[i + 1];
    l[2] += (x[i + 2] * y[i + 2]) * w[i + 2];
    l[3] += (x[i + 3] * y[i + 3]) * w[i + 3];
  }
  for (std::size_t i = n4; i < n; ++i) l[i & 3] += (x[i] * y[i]) * w[i];
  return (l[0] + l[1]) + (l[2] + l[3]);
}

double block_diff_dot(const double* a2, const double* a1, const double* b2, const double* b1,
                      std::size_t n) {
  double l[kLanes] = {0.0, 0.0, 0.0, 0.0};
  std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    l[0] += (a2[i] - a1[i]) * (b2[i] - b1[i]);
    l[1] += (a2[i + 1] - a1[i + 1]) * (b2[i + 1] - b1[i + 1]);
    l[2] += (a2[i + 2] - a1[i + 2]) * (b2[i + 2] - b1[i + 2]);
    l[3] += (a2[i + 3] - a1[i + 3]) * (b2[i + 3] - b1[i + 3]);
  }
  for (std::size_t i = n4; i < n; ++i) l[i & 3] += (a2[i] - a1[i]) * (b2[i] - b1[i]);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

}  // namespace ref

const VTable& scalar_table() {
  static const VTable t = {ref::axpy,        ref::xpay,      ref::scal,
                           ref::vmul,        ref::add2,      ref::stencil_row,
                           ref::finish_lap,  ref::block_sum, ref::block_dot,
                           ref::block_wdot,  ref::block_diff_dot};
  return t;
}

}  // namespace detail

namespace {

using detail::VTable;

Backend detect_backend() {
  if (const char* env = std::getenv("LOGSCHRO_KERNELS")) {
    std::string s(env);
    if (s == "scalar") return Backend::scalar;
    if (s == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
    if (s == "neon" && backend_available(Backend::neon)) return Backend::neon;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
#if defined(__aarch64__)
  return Backend::neon;
#endif
  return Backend::scalar;
}

Backend& current_backend() {
  static Backend b = detect_backend();
  return b;
}

const VTable& table() {
  switch (current_backend()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::avx2:
      return detail::avx2_table();
#endif
#if defined(__aarch64__)
    case Backend::neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

template <class BlockFn>
double blocked_reduce(std::size_t n, BlockFn block) {
  if (n == 0) return 0.0;
  std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  if (nblocks == 1) return block(0, n);
  std::vector<double> partial(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::size_t off = b * kReduceBlock;
    std::size_t len = (b + 1 == nblocks) ? n - off : kReduceBlock;
    partial[b] = block(off, len);
  }
  // pairwise tree, fixed shape for a given n
  std::size_t m = nblocks;
  while (m > 1) {
    std::size_t half = m / 2;
    for (std::size_t i = 0; i < half; ++i) partial[i] = partial[2 * i] + partial[2 * i + 1];
    if (m & 1) {
      partial[half] = partial[m - 1];
      ++half;
    }
    m = half;
  }
  return partial[0];
}

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return current_backend(); }

void force_backend(Backend b) {
  if (!backend_available(b)) throw std::runtime_error("kernel backend not available: " + backend_name(b));
  current_backend() = b;
}

void reset_backend() { current_backend() = detect_backend(); }

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

void axpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }
void xpay(const double* x, double a, double* y, std::size_t n) { table().xpay(x, a, y, n); }
void scal(double a, double* x, std::size_t n) { table().scal(a, x, n); }
void vmul(const double* a, const double* b, double* out, std::size_t n) { table().vmul(a, b, out, n); }
void add2(const double* a, const double* b, double* out, std::size_t n) { table().add2(a, b, out, n); }

void stencil_row_periodic(const double* u, double* out, std::size_t n) {
  if (n < 2) throw std::invalid_argument("stencil_row_periodic: row length must be >= 2");
  table().stencil_row(u, out, n);
}

void finish_laplacian(const double* u, double two_n, double inv_h2, double* out, std::size_t n) {
  table().finish_lap(u, two_n, inv_h2, out, n);
}

double sum(const double* x, std::size_t n) {
  const VTable& t = table();
  return blocked_reduce(n, [&](std::size_t off, std::size_t len) { return t.block_sum(x + off, len); });
}

double dot(const double* x, const double* y, std::size_t n) {
  const VTable& t = table();
  return blocked_reduce(n, [&](std::size_t off, std::size_t len) { return t.block_dot(x + off, y + off, len); });
}

double wdot(const double* x, const double* y, const double* w, std::size_t n) {
  const VTable& t = table();
  return blocked_reduce(
      n, [&](std::size_t off, std::size_t len) { return t.block_wdot(x + off, y + off, w + off, len); });
}

double diff_dot(const double* a2, const double* a1, const double* b2, const double* b1, std::size_t n) {
  const VTable& t = table();
  return blocked_reduce(n, [&](std::size_t off, std::size_t len) {
    return t.block_diff_dot(a2 + off, a1 + off, b2 + off, b1 + off, len);
  });
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

double min_value(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = std::min(m, x[i]);
  return m;
}

double max_value(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

}  // namespace logschro::kernels
