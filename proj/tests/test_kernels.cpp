// Tridiagonal apply (serial vs OpenMP bitwise equality) and compensated
// summation accuracy.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>
#include <vector>

#include "dicke/kernels.hpp"

namespace kernels = dicke::kernels;
using kernels::complex;

namespace {

struct Bands {
  std::vector<complex> diag, up, down, p;
};

Bands random_bands(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Bands b;
  for (auto* v : {&b.diag, &b.up, &b.down, &b.p}) {
    v->resize(static_cast<std::size_t>(dim));
    for (auto& z : *v) z = complex(u(rng), u(rng));
  }
  return b;
}

}  // namespace

TEST_CASE("tridiagonal apply matches a direct dense evaluation") {
  const int dim = 7;
  const auto b = random_bands(dim, 12345);
  std::vector<complex> y(dim);
  kernels::apply_tridiag_serial(b.diag, b.up, b.down, b.p, y);
  for (int i = 0; i < dim; ++i) {
    complex want = b.diag[i] * b.p[i];
    if (i > 0) want += b.up[i - 1] * b.p[i - 1];
    if (i + 1 < dim) want += b.down[i + 1] * b.p[i + 1];
    CHECK(std::abs(y[i] - want) == 0.0);  // same operations, same order
  }
}

TEST_CASE("openmp apply is bitwise identical to the serial reference") {
  for (int dim : {1, 2, 3, 64, 1000}) {
    const auto b = random_bands(dim, 777u + static_cast<unsigned>(dim));
    std::vector<complex> ys(dim), yp(dim);
    kernels::apply_tridiag_serial(b.diag, b.up, b.down, b.p, ys);
    kernels::apply_tridiag_openmp(b.diag, b.up, b.down, b.p, yp);
    for (int i = 0; i < dim; ++i) {
      CHECK(ys[i].real() == yp[i].real());
      CHECK(ys[i].imag() == yp[i].imag());
    }
    // The dispatcher reaches the same code paths.
    std::vector<complex> yd(dim);
    kernels::apply_tridiag(b.diag, b.up, b.down, b.p, yd, kernels::Exec::openmp);
    for (int i = 0; i < dim; ++i) CHECK(yd[i] == yp[i]);
  }
}

TEST_CASE("compensated sum recovers catastrophic cancellation") {
  // Naive left-to-right summation loses the small term entirely.
  const std::vector<double> vals = {1e16, 1.0, -1e16};
  CHECK(kernels::compensated_sum(vals) == 1.0);

  // Long alternating series: compensated result is exact, order deterministic.
  std::vector<double> alt;
  for (int i = 0; i < 10000; ++i) {
    alt.push_back(0.1);
    alt.push_back(-0.1);
  }
  alt.push_back(2.5);
  CHECK(kernels::compensated_sum(alt) == 2.5);
}

TEST_CASE("compensated dot matches exact small-integer arithmetic") {
  const std::vector<double> w = {3.0, -2.0, 5.0, 7.0};
  const std::vector<double> v = {2.0, 9.0, -4.0, 1.0};
  CHECK(kernels::compensated_dot(w, v) == 3.0 * 2 - 2.0 * 9 - 5.0 * 4 + 7.0);
}

TEST_CASE("jz weighted sum uses weights (2i - N)^k") {
  // N = 2: weights -2, 0, 2 (k=1) and 4, 0, 4 (k=2).
  const std::vector<double> pops = {0.5, 0.3, 0.2};
  CHECK(kernels::jz_weighted_sum(2, pops, 0) == doctest::Approx(1.0).epsilon(1e-16));
  CHECK(kernels::jz_weighted_sum(2, pops, 1) ==
        doctest::Approx(-2.0 * 0.5 + 2.0 * 0.2).epsilon(1e-15));
  CHECK(kernels::jz_weighted_sum(2, pops, 2) ==
        doctest::Approx(4.0 * 0.5 + 4.0 * 0.2).epsilon(1e-15));
}
