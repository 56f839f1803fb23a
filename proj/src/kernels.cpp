// kernels.cpp — OpenMP and serial reference kernels.
#include "dicke/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace dicke::kernels {

namespace {

void check_sizes(std::span<const complex> diag, std::span<const complex> up,
                 std::span<const complex> down, std::span<const complex> p,
                 std::span<complex> y) {
  const std::size_t n = diag.size();
  if (up.size() != n || down.size() != n || p.size() != n || y.size() != n)
    throw std::invalid_argument("apply_tridiag: band/vector size mismatch");
  if (n == 0) throw std::invalid_argument("apply_tridiag: empty operands");
}

inline complex row_apply(std::span<const complex> diag,
                         std::span<const complex> up,
                         std::span<const complex> down,
                         std::span<const complex> p, std::size_t i,
                         std::size_t n) {
  complex v = diag[i] * p[i];
  if (i > 0) v += up[i - 1] * p[i - 1];
  if (i + 1 < n) v += down[i + 1] * p[i + 1];
  return v;
}

}  // namespace

void apply_tridiag_serial(std::span<const complex> diag,
                          std::span<const complex> up,
                          std::span<const complex> down,
                          std::span<const complex> p, std::span<complex> y) {
  check_sizes(diag, up, down, p, y);
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) y[i] = row_apply(diag, up, down, p, i, n);
}

void apply_tridiag_openmp(std::span<const complex> diag,
                          std::span<const complex> up,
                          std::span<const complex> down,
                          std::span<const complex> p, std::span<complex> y) {
  check_sizes(diag, up, down, p, y);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(diag.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    y[i] = row_apply(diag, up, down, p, static_cast<std::size_t>(i),
                     static_cast<std::size_t>(n));
}

void apply_tridiag(std::span<const complex> diag, std::span<const complex> up,
                   std::span<const complex> down, std::span<const complex> p,
                   std::span<complex> y, Exec exec) {
  if (exec == Exec::openmp)
    apply_tridiag_openmp(diag, up, down, p, y);
  else
    apply_tridiag_serial(diag, up, down, p, y);
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double compensated_dot(std::span<const double> weights,
                       std::span<const double> values) {
  if (weights.size() != values.size())
    throw std::invalid_argument("compensated_dot: size mismatch");
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = weights[i] * values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double jz_weighted_sum(int N, std::span<const double> populations, int power) {
  if (populations.size() != static_cast<std::size_t>(N) + 1)
    throw std::invalid_argument("jz_weighted_sum: population size mismatch");
  if (power < 0) throw std::invalid_argument("jz_weighted_sum: power < 0");
  double sum = 0.0, comp = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double jz = 2.0 * i - N;
    double w = 1.0;
    for (int k = 0; k < power; ++k) w *= jz;
    const double v = w * populations[static_cast<std::size_t>(i)];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace dicke::kernels
