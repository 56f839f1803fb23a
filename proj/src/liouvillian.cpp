// liouvillian.cpp — tilted generator construction, stationary state, moments.
#include "dicke/liouvillian.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace dicke {

double x_minus(int N, int i) {
  return static_cast<double>(N - i) * static_cast<double>(i + 1);
}

double x_plus(int N, int i) {
  return static_cast<double>(i) * static_cast<double>(N - i + 1);
}

TiltedGenerator build_tilted_generator(const ModelParams& p,
                                       CountingField chi) {
  p.validate();
  const complex i_unit(0.0, 1.0);
  const complex phase_up = std::exp(-i_unit * chi.value);  // counted absorption
  const complex phase_dn = std::exp(i_unit * chi.value);   // counted emission
  const double up_coeff_s = p.gamma_s * p.n_s;
  const double up_coeff_d = p.gamma_d * p.n_d;
  const double dn_coeff_s = p.gamma_s * (1.0 + p.n_s);
  const double dn_coeff_d = p.gamma_d * (1.0 + p.n_d);

  TiltedGenerator gen;
  gen.N = p.N;
  gen.chi = chi.value;
  const int dim = gen.dim();
  gen.diag.resize(dim);
  gen.up.resize(dim);
  gen.down.resize(dim);
  for (int i = 0; i < dim; ++i) {
    const double xm = x_minus(p.N, i);
    const double xp = x_plus(p.N, i);
    // Loss terms are untilted; they reuse the same floating subexpressions
    // as the chi = 0 band values, so a chi = 0 column sum telescopes to the
    // single rounding error of this two-term addition (one ulp of the
    // diagonal, and exactly zero whenever the addition is exact).
    gen.diag[i] = -((up_coeff_s + up_coeff_d) * xm + (dn_coeff_s + dn_coeff_d) * xp);
    gen.up[i] = (up_coeff_s + up_coeff_d * phase_up) * xm;
    gen.down[i] = (dn_coeff_s + dn_coeff_d * phase_dn) * xp;
  }
  return gen;
}

ExtendedBands build_extended_bands(const ModelParams& p, CountingField chi) {
  p.validate();
  using longc = std::complex<long double>;
  const longc i_unit(0.0L, 1.0L);
  const longc chi_l(static_cast<long double>(chi.value.real()),
                    static_cast<long double>(chi.value.imag()));
  const longc phase_up = std::exp(-i_unit * chi_l);
  const longc phase_dn = std::exp(i_unit * chi_l);
  const long double up_s = static_cast<long double>(p.gamma_s) * p.n_s;
  const long double up_d = static_cast<long double>(p.gamma_d) * p.n_d;
  const long double dn_s = static_cast<long double>(p.gamma_s) * (1.0L + p.n_s);
  const long double dn_d = static_cast<long double>(p.gamma_d) * (1.0L + p.n_d);

  ExtendedBands b;
  b.N = p.N;
  const int dim = p.N + 1;
  b.diag.resize(dim);
  b.up.resize(dim);
  b.down.resize(dim);
  for (int i = 0; i < dim; ++i) {
    const long double xm = x_minus(p.N, i);
    const long double xp = x_plus(p.N, i);
    b.diag[i] = -((up_s + up_d) * xm + (dn_s + dn_d) * xp);
    b.up[i] = (up_s + up_d * phase_up) * xm;
    b.down[i] = (dn_s + dn_d * phase_dn) * xp;
  }
  return b;
}

RateBands build_rate_bands(const ModelParams& p) {
  p.validate();
  RateBands b;
  b.N = p.N;
  const int dim = p.N + 1;
  b.up_total.resize(dim);
  b.down_total.resize(dim);
  b.up_drain.resize(dim);
  b.down_drain.resize(dim);
  for (int i = 0; i < dim; ++i) {
    const double xm = x_minus(p.N, i);
    const double xp = x_plus(p.N, i);
    b.up_total[i] = (p.gamma_s * p.n_s + p.gamma_d * p.n_d) * xm;
    b.down_total[i] = (p.gamma_s * (1.0 + p.n_s) + p.gamma_d * (1.0 + p.n_d)) * xp;
    b.up_drain[i] = p.gamma_d * p.n_d * xm;
    b.down_drain[i] = p.gamma_d * (1.0 + p.n_d) * xp;
  }
  return b;
}

StationaryState stationary_state(const ModelParams& p) {
  const EffectiveBath bath = effective_bath(p);
  StationaryState st;
  st.N = p.N;
  st.populations.assign(static_cast<std::size_t>(p.N) + 1, 0.0);
  if (bath.n_bar == 0.0) {
    st.populations[0] = 1.0;  // all weight in the collective ground state
    return st;
  }
  const double r = bath.ratio;
  double w = 1.0;
  st.populations[0] = w;
  for (int i = 1; i <= p.N; ++i) {
    w *= r;  // two-term recurrence; r < 1 so no overflow, underflow is benign
    st.populations[i] = w;
  }
  const double norm = kernels::compensated_sum(st.populations);
  for (double& v : st.populations) v /= norm;
  return st;
}

double exact_moment(const ModelParams& p, int k) {
  if (k < 0) throw std::invalid_argument("exact_moment: order must be >= 0");
  const StationaryState st = stationary_state(p);
  return kernels::jz_weighted_sum(p.N, st.populations, k);
}

std::vector<complex> apply_generator(const TiltedGenerator& gen,
                                     std::span<const complex> p,
                                     kernels::Exec exec) {
  std::vector<complex> y(gen.diag.size());
  kernels::apply_tridiag(gen.diag, gen.up, gen.down, p, y, exec);
  return y;
}

namespace {

// Series coefficients of g1(v) = 2/log1p(v) - 2/v - 1 = sum_{k>=1} c[k-1] v^k.
// With b = reciprocal series of log1p(v)/v = sum (-1)^k v^k / (k+1), the
// expansion is g1 = (2 b_1 - 1) + sum_{k>=1} 2 b_{k+1} v^k, and 2 b_1 - 1 = 0.
struct G1Series {
  static constexpr int kTerms = 24;
  double c[kTerms] = {};
  G1Series() {
    double a[kTerms + 2], b[kTerms + 2];
    for (int k = 0; k <= kTerms + 1; ++k) a[k] = (k % 2 ? -1.0 : 1.0) / (k + 1);
    b[0] = 1.0;
    for (int n = 1; n <= kTerms + 1; ++n) {
      double s = 0.0;
      for (int j = 1; j <= n; ++j) s += a[j] * b[n - j];
      b[n] = -s;
    }
    for (int k = 1; k <= kTerms; ++k) c[k - 1] = 2.0 * b[k + 1];
  }
};

double g1_of(double v) {
  static const G1Series series;
  if (v <= 0.1) {
    double s = 0.0;
    for (int k = G1Series::kTerms - 1; k >= 0; --k) s = series.c[k] + s * v;
    return s * v;
  }
  const long double lv = v;
  return static_cast<double>(2.0L / std::log1p(lv) - 2.0L / lv - 1.0L);
}

double g2_of(double w) {
  if (w <= 0.2) {
    const double w2 = w * w;
    return w * (1.0 / 6.0 +
                w2 * (-1.0 / 360.0 +
                      w2 * (1.0 / 15120.0 +
                            w2 * (-1.0 / 604800.0 + w2 / 23950080.0))));
  }
  const long double lw = w;
  return static_cast<double>(1.0L / std::tanh(lw / 2.0L) - 2.0L / lw);
}

}  // namespace

double sigma_n(int N, double n_bar) {
  if (N < 1) throw std::invalid_argument("sigma_n: N must be >= 1");
  if (!(n_bar >= 0.0)) throw std::invalid_argument("sigma_n: n_bar must be >= 0");
  if (n_bar == 0.0) return static_cast<double>(N);
  const double K = N + 1.0;
  const double v = 1.0 / n_bar;
  const double w = K * std::log1p(v);
  return K * g2_of(w) + g1_of(v);
}

double first_cumulant_closed_form(const ModelParams& p) {
  const EffectiveBath bath = effective_bath(p);
  return (p.n_s - p.n_d) * p.gamma_s * p.gamma_d / bath.gamma_total *
         sigma_n(p.N, bath.n_bar);
}

void dump_bands_csv(const TiltedGenerator& gen, std::ostream& os) {
  os << "m,diag_re,diag_im,upper_re,upper_im,lower_re,lower_im\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    os << buf;
  };
  for (int i = 0; i <= gen.N; ++i) {
    put(i - 0.5 * gen.N, ',');
    put(gen.diag[i].real(), ',');
    put(gen.diag[i].imag(), ',');
    put(gen.down[i].real(), ',');  // entry (i-1, i): the upper band
    put(gen.down[i].imag(), ',');
    put(gen.up[i].real(), ',');    // entry (i+1, i): the lower band
    put(gen.up[i].imag(), '\n');
  }
}

}  // namespace dicke
