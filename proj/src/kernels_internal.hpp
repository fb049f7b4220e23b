#pragma once

#include <cstddef>

// Per-backend entry points. Block kernels process at most kReduceBlock
// elements; the dispatcher combines block partials with a pairwise tree.

namespace logschro::kernels::detail {

struct VTable {
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*xpay)(const double*, double, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*vmul)(const double*, const double*, double*, std::size_t);
  void (*add2)(const double*, const double*, double*, std::size_t);
  void (*stencil_row)(const double*, double*, std::size_t);
  void (*finish_lap)(const double*, double, double, double*, std::size_t);
  double (*block_sum)(const double*, std::size_t);
  double (*block_dot)(const double*, const double*, std::size_t);
  double (*block_wdot)(const double*, const double*, const double*, std::size_t);
  double (*block_diff_dot)(const double*, const double*, const double*, const double*, std::size_t);
};

const VTable& scalar_table();

#if defined(__x86_64__) || defined(_M_X64)
const VTable& avx2_table();
#endif
#if defined(__aarch64__)
const VTable& neon_table();
#endif

}  // namespace logschro::kernels::detail
