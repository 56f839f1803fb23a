// kernels.hpp — low-level numeric kernels with OpenMP and serial reference
// variants. Every parallel variant computes each output element independently
// from read-only inputs, so results are bitwise identical to the serial
// reference for any thread count.
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace dicke::kernels {

using complex = std::complex<double>;

enum class Exec { serial, openmp };

// y[i] = diag[i] p[i] + up[i-1] p[i-1] + down[i+1] p[i+1] (tridiagonal apply;
// up[i] feeds row i+1, down[i] feeds row i-1, matching a birth-death
// generator stored by its three bands). All spans must have equal size.
void apply_tridiag_serial(std::span<const complex> diag,
                          std::span<const complex> up,
                          std::span<const complex> down,
                          std::span<const complex> p, std::span<complex> y);
void apply_tridiag_openmp(std::span<const complex> diag,
                          std::span<const complex> up,
                          std::span<const complex> down,
                          std::span<const complex> p, std::span<complex> y);
void apply_tridiag(std::span<const complex> diag, std::span<const complex> up,
                   std::span<const complex> down, std::span<const complex> p,
                   std::span<complex> y, Exec exec);

// Neumaier-compensated sum; deterministic left-to-right order.
double compensated_sum(std::span<const double> values);

// Compensated sum of weights[i] * values[i].
double compensated_dot(std::span<const double> weights,
                       std::span<const double> values);

// Compensated sum of (2*i - N)^power * populations[i], i = 0..N. The weight
// is the J_z eigenvalue of population slot i.
double jz_weighted_sum(int N, std::span<const double> populations, int power);

}  // namespace dicke::kernels
