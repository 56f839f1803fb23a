// liouvillian.hpp — counting-field-tilted generator of the collective decay
// master equation, reduced exactly to the ladder of symmetric (maximum
// angular momentum) population states. With j = N/2 and m = -j..j the
// populations p_m form a birth-death chain of dimension N+1; slot i = m + N/2
// carries J_z eigenvalue 2m = 2i - N.
#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "dicke/kernels.hpp"
#include "dicke/model.hpp"

namespace dicke {

// Collective ladder weights at slot i (exact small integers in double):
//   x_minus(i) = (N - i)(i + 1) = j(j+1) - m(m+1), the m -> m+1 weight,
//   x_plus(i)  = i (N - i + 1)  = j(j+1) - m(m-1), the m -> m-1 weight.
double x_minus(int N, int i);
double x_plus(int N, int i);

// Tilted generator L(chi) stored by bands. up[i] is the rate out of slot i
// into slot i+1 (matrix entry (i+1, i)); down[i] the rate into slot i-1
// (entry (i-1, i)); diag[i] = -(total loss rate), independent of chi.
//   up(i)   = (gamma_s n_s     + gamma_d n_d     e^{-i chi}) x_minus(i)
//   down(i) = (gamma_s (1+n_s) + gamma_d (1+n_d) e^{+i chi}) x_plus(i)
// At chi = 0 every column sums to zero within one ulp of the diagonal.
struct TiltedGenerator {
  int N = 0;
  complex chi{0.0, 0.0};
  std::vector<complex> diag, up, down;

  int dim() const { return N + 1; }
};

// Long-double twin of the tilted bands, same layout as TiltedGenerator.
// Double-precision entries are rounded at ~eps * |entry|, and that matrix
// rounding is the accuracy floor of any eigenvalue computed from them;
// residual-level evaluations (Rayleigh quotients) against these bands push
// the floor down to long-double rounding instead.
struct ExtendedBands {
  int N = 0;
  std::vector<std::complex<long double>> diag, up, down;
};

ExtendedBands build_extended_bands(const ModelParams& p, CountingField chi);

// chi = 0 rate decomposition used by the cumulant recursion: total up/down
// rates plus the drain-only ("counted") pieces.
struct RateBands {
  int N = 0;
  std::vector<double> up_total, down_total;  // untilted rates
  std::vector<double> up_drain, down_drain;  // gamma_d n_d x_minus, gamma_d (1+n_d) x_plus
};

// Stationary populations of the untilted generator: the truncated geometric
// distribution p_{i+1}/p_i = n_bar / (1 + n_bar).
struct StationaryState {
  int N = 0;
  std::vector<double> populations;
};

TiltedGenerator build_tilted_generator(const ModelParams& p, CountingField chi);
RateBands build_rate_bands(const ModelParams& p);
StationaryState stationary_state(const ModelParams& p);

// <J_z^k> under the stationary state, by direct compensated summation.
double exact_moment(const ModelParams& p, int k);

// y = L(chi) p. Throws on dimension mismatch.
std::vector<complex> apply_generator(const TiltedGenerator& gen,
                                     std::span<const complex> p,
                                     kernels::Exec exec = kernels::Exec::serial);

// Closed form of -<J_z> for the truncated geometric state ("sigma_N"), the
// N-dependent factor of the exact first current cumulant. Evaluated through
// the cancellation-free decomposition
//   sigma_N = K g2(w) + g1(v),  K = N+1, v = 1/n_bar, w = K log1p(v),
//   g2(w) = coth(w/2) - 2/w,    g1(v) = 2/log1p(v) - 2/v - 1,
// which is algebraically identical to
//   [(N - 2 n)(1+n)^{N+1} + n^{N+1}(2 + N + 2 n)] / [(1+n)^{N+1} - n^{N+1}]
// but stable for n_bar >> N as well as n_bar -> 0.
double sigma_n(int N, double n_bar);

// Exact stationary first current cumulant
//   <<I_1>> = (n_s - n_d) gamma_s gamma_d / (gamma_s + gamma_d) * sigma_N.
double first_cumulant_closed_form(const ModelParams& p);

// Debug dump of the generator bands as CSV with columns
// m, diag_re, diag_im, upper_re, upper_im, lower_re, lower_im
// (upper = matrix entry (i-1, i) = down[i]; lower = entry (i+1, i) = up[i]).
void dump_bands_csv(const TiltedGenerator& gen, std::ostream& os);

}  // namespace dicke
