#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "logschro/kernels.hpp"

using namespace logschro;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng) * std::exp(6.0 * d(rng));  // mixed magnitudes
  return v;
}

const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 16, 100, 1023, 4096, 4097, 100000};

}  // namespace

TEST_CASE("reductions match a long-double sequential reference") {
  for (std::size_t n : kSizes) {
    auto x = random_vec(n, 1000 + n), y = random_vec(n, 2000 + n), w = random_vec(n, 3000 + n);
    long double s = 0, d = 0, wd = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s += x[i];
      d += static_cast<long double>(x[i]) * y[i];
      wd += static_cast<long double>(x[i]) * y[i] * w[i];
    }
    double scale_s = 1.0, scale_d = 1.0, scale_w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale_s += std::fabs(x[i]);
      scale_d += std::fabs(x[i] * y[i]);
      scale_w += std::fabs(x[i] * y[i] * w[i]);
    }
    CHECK(std::fabs(kernels::sum(x.data(), n) - static_cast<double>(s)) <= 1e-13 * scale_s);
    CHECK(std::fabs(kernels::dot(x.data(), y.data(), n) - static_cast<double>(d)) <= 1e-13 * scale_d);
    CHECK(std::fabs(kernels::wdot(x.data(), y.data(), w.data(), n) - static_cast<double>(wd)) <=
          1e-13 * scale_w);
  }
}

TEST_CASE("scalar and SIMD backends agree bitwise") {
  if (!kernels::backend_available(kernels::Backend::avx2) &&
      !kernels::backend_available(kernels::Backend::neon)) {
    MESSAGE("no SIMD backend on this host; dispatch test skipped");
    return;
  }
  kernels::Backend simd = kernels::backend_available(kernels::Backend::avx2)
                              ? kernels::Backend::avx2
                              : kernels::Backend::neon;
  for (std::size_t n : kSizes) {
    auto x = random_vec(n, 10 + n), y = random_vec(n, 20 + n), w = random_vec(n, 30 + n);
    auto a2 = random_vec(n, 40 + n), b2 = random_vec(n, 50 + n);

    struct Out {
      double s, d, wd, dd;
      std::vector<double> axpy, xpay, scal, vmul, add2, sten, fin;
    };
    auto run = [&](kernels::Backend b) {
      kernels::force_backend(b);
      Out o;
      o.s = kernels::sum(x.data(), n);
      o.d = kernels::dot(x.data(), y.data(), n);
      o.wd = kernels::wdot(x.data(), y.data(), w.data(), n);
      o.dd = kernels::diff_dot(a2.data(), x.data(), b2.data(), y.data(), n);
      o.axpy = y;
      kernels::axpy(1.7, x.data(), o.axpy.data(), n);
      o.xpay = y;
      kernels::xpay(x.data(), -0.3, o.xpay.data(), n);
      o.scal = x;
      kernels::scal(3.14159, o.scal.data(), n);
      o.vmul.assign(n, 0.0);
      kernels::vmul(x.data(), y.data(), o.vmul.data(), n);
      o.add2 = w;
      kernels::add2(x.data(), y.data(), o.add2.data(), n);
      if (n >= 2) {
        o.sten.assign(n, 0.0);
        kernels::stencil_row_periodic(x.data(), o.sten.data(), n);
      }
      o.fin = y;
      kernels::finish_laplacian(x.data(), 2.0, 1024.0, o.fin.data(), n);
      return o;
    };
    Out ref = run(kernels::Backend::scalar);
    Out vec = run(simd);
    kernels::reset_backend();

    CHECK(ref.s == vec.s);
    CHECK(ref.d == vec.d);
    CHECK(ref.wd == vec.wd);
    CHECK(ref.dd == vec.dd);
    CHECK(ref.axpy == vec.axpy);
    CHECK(ref.xpay == vec.xpay);
    CHECK(ref.scal == vec.scal);
    CHECK(ref.vmul == vec.vmul);
    CHECK(ref.add2 == vec.add2);
    CHECK(ref.sten == vec.sten);
    CHECK(ref.fin == vec.fin);
  }
}

TEST_CASE("runtime dispatch picks an available backend and can be forced") {
  kernels::Backend b = kernels::active_backend();
  CHECK(kernels::backend_available(b));
  kernels::force_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  kernels::reset_backend();
  CHECK(kernels::active_backend() == b);
  if (!kernels::backend_available(kernels::Backend::neon))
    CHECK_THROWS(kernels::force_backend(kernels::Backend::neon));
}

TEST_CASE("stencil row periodic wrap") {
  std::vector<double> u = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> out(5);
  kernels::stencil_row_periodic(u.data(), out.data(), 5);
  CHECK(out[0] == 5.0 + 2.0);
  CHECK(out[1] == 1.0 + 3.0);
  CHECK(out[2] == 2.0 + 4.0);
  CHECK(out[3] == 3.0 + 5.0);
  CHECK(out[4] == 4.0 + 1.0);
}

TEST_CASE("reduction is deterministic across repeated calls") {
  auto x = random_vec(54321, 99);
  double a = kernels::sum(x.data(), x.size());
  for (int k = 0; k < 5; ++k) CHECK(kernels::sum(x.data(), x.size()) == a);
}

TEST_CASE("min max helpers") {
  std::vector<double> x = {3.0, -7.5, 0.25, 7.0};
  CHECK(kernels::max_abs(x.data(), 4) == 7.5);
  CHECK(kernels::min_value(x.data(), 4) == -7.5);
  CHECK(kernels::max_value(x.data(), 4) == 7.0);
}
