#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the grid operators and solvers.
// Every kernel has a scalar reference implementation and, where the platform
// provides them, SIMD variants (AVX2 on x86-64, NEON on aarch64) selected at
// runtime. Reductions are computed with a fixed shape (4 accumulator lanes
// per block of kReduceBlock elements, blocks combined by a pairwise tree), so
// all backends produce bitwise-identical results and reruns are reproducible.

namespace logschro::kernels {

enum class Backend { scalar, avx2, neon };

inline constexpr std::size_t kReduceBlock = 4096;
inline constexpr std::size_t kLanes = 4;

bool backend_available(Backend b);
Backend active_backend();
// Force a backend (tests use this to compare variants). Throws if unavailable.
void force_backend(Backend b);
void reset_backend();
std::string backend_name(Backend b);

// Elementwise. All loops evaluate the same expression in the same order on
// every backend.
void axpy(double a, const double* x, double* y, std::size_t n);   // y += a*x
void xpay(const double* x, double a, double* y, std::size_t n);   // y = x + a*y
void scal(double a, double* x, std::size_t n);                    // x *= a
void vmul(const double* a, const double* b, double* out, std::size_t n);  // out = a.*b
void add2(const double* a, const double* b, double* out, std::size_t n);  // out += a + b
// out[j] = u[j-1] + u[j+1] with periodic wrap on a contiguous row.
void stencil_row_periodic(const double* u, double* out, std::size_t n);
// out[i] = (out[i] - two_n*u[i]) * inv_h2  (final pass of the Laplacian)
void finish_laplacian(const double* u, double two_n, double inv_h2, double* out, std::size_t n);

// Fixed-shape reductions (bitwise identical across backends).
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
// sum of x[i]*y[i]*w[i]
double wdot(const double* x, const double* y, const double* w, std::size_t n);
// sum of (a2[i]-a1[i])*(b2[i]-b1[i]); used for forward-difference gradients
double diff_dot(const double* a2, const double* a1,
                const double* b2, const double* b1, std::size_t n);

// Order-independent reductions (exact for any evaluation order).
double max_abs(const double* x, std::size_t n);
double min_value(const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);

}  // namespace logschro::kernels
