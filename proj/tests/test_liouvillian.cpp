// Tilted-generator construction against a hand-computed 3x3 oracle,
// stationary-state structure, compensated moments, and the closed first
// cumulant.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dicke/liouvillian.hpp"
#include "dicke/model.hpp"

using dicke::complex;
using dicke::CountingField;
using dicke::ModelParams;

namespace {

ModelParams params(int N, double ns, double nd = 0.0, double gs = 1.0,
                   double gd = 1.0) {
  ModelParams p;
  p.N = N;
  p.gamma_s = gs;
  p.gamma_d = gd;
  p.n_s = ns;
  p.n_d = nd;
  return p;
}

}  // namespace

TEST_CASE("ladder weights are the exact small integers") {
  // N = 2: x_minus = (N-i)(i+1) -> 2, 2, 0;  x_plus = i(N-i+1) -> 0, 2, 2.
  CHECK(dicke::x_minus(2, 0) == 2.0);
  CHECK(dicke::x_minus(2, 1) == 2.0);
  CHECK(dicke::x_minus(2, 2) == 0.0);
  CHECK(dicke::x_plus(2, 0) == 0.0);
  CHECK(dicke::x_plus(2, 1) == 2.0);
  CHECK(dicke::x_plus(2, 2) == 2.0);
  // Symmetry x_plus(i) = x_minus(N - i) and the N^2/4 midpoint scale.
  for (int N : {1, 5, 8}) {
    for (int i = 0; i <= N; ++i)
      CHECK(dicke::x_plus(N, i) == dicke::x_minus(N, N - i));
  }
  CHECK(dicke::x_minus(80, 39) == (80.0 - 39.0) * 40.0);
}

TEST_CASE("N=2 tilted generator matches the hand-computed band oracle") {
  // gamma_s = gamma_d = 1, n_s = 1, n_d = 0:
  //   up(i)   = 1 * x_minus(i)            (source absorption only)
  //   down(i) = (2 + e^{i chi}) x_plus(i) (source + counted drain emission)
  //   diag    = -(1 * x_minus + 3 * x_plus)
  const double chi = 0.9;
  const auto gen =
      dicke::build_tilted_generator(params(2, 1.0), CountingField(chi));
  const complex eich = std::exp(complex(0.0, chi));
  REQUIRE(gen.dim() == 3);

  CHECK(gen.diag[0] == complex(-2.0, 0.0));
  CHECK(gen.diag[1] == complex(-8.0, 0.0));
  CHECK(gen.diag[2] == complex(-6.0, 0.0));
  CHECK(gen.up[0] == complex(2.0, 0.0));
  CHECK(gen.up[1] == complex(2.0, 0.0));
  CHECK(std::abs(gen.up[2]) == 0.0);
  CHECK(std::abs(gen.down[0]) == 0.0);
  CHECK(std::abs(gen.down[1] - (4.0 + 2.0 * eich)) < 1e-15);
  CHECK(std::abs(gen.down[2] - (4.0 + 2.0 * eich)) < 1e-15);
}

TEST_CASE("chi = 0 columns sum to zero at machine precision") {
  // The residual is the rounding error of the diagonal's two-term addition,
  // so it is bounded by one ulp of the diagonal magnitude.
  for (const auto& p :
       {params(1, 0.3), params(17, 2.5, 0.5, 0.4, 1.7), params(100, 10.0, 5.0)}) {
    const auto gen = dicke::build_tilted_generator(p, CountingField(0.0));
    for (int i = 0; i <= p.N; ++i) {
      complex col = gen.diag[i];
      col += gen.up[i];    // entry (i+1, i); up[N] is zero
      col += gen.down[i];  // entry (i-1, i); down[0] is zero
      CHECK(std::abs(col) <= 1e-15 * std::abs(gen.diag[i]));
    }
  }
  // With integer-valued bands every addition is exact and the sums vanish
  // identically (same generator as the hand-computed N=2 oracle).
  const auto gen = dicke::build_tilted_generator(params(2, 1.0), CountingField(0.0));
  for (int i = 0; i <= 2; ++i)
    CHECK(std::abs(gen.diag[i] + gen.up[i] + gen.down[i]) == 0.0);
}

TEST_CASE("extended bands agree with the double bands to double rounding") {
  const auto p = params(9, 3.7, 0.4, 0.6, 1.9);
  const CountingField chi(1.3);
  const auto gen = dicke::build_tilted_generator(p, chi);
  const auto ext = dicke::build_extended_bands(p, chi);
  for (int i = 0; i <= p.N; ++i) {
    CHECK(std::abs(complex(static_cast<double>(ext.diag[i].real()),
                           static_cast<double>(ext.diag[i].imag())) -
                   gen.diag[i]) <= 1e-15 * std::abs(gen.diag[i]));
    CHECK(std::abs(complex(static_cast<double>(ext.up[i].real()),
                           static_cast<double>(ext.up[i].imag())) -
                   gen.up[i]) <= 1e-15 * std::abs(gen.up[i]) + 1e-300);
    CHECK(std::abs(complex(static_cast<double>(ext.down[i].real()),
                           static_cast<double>(ext.down[i].imag())) -
                   gen.down[i]) <= 1e-15 * std::abs(gen.down[i]) + 1e-300);
  }
}

TEST_CASE("rate bands split total rates into source and counted drain parts") {
  const auto p = params(4, 2.0, 0.5, 0.7, 1.3);
  const auto rb = dicke::build_rate_bands(p);
  for (int i = 0; i <= p.N; ++i) {
    const double xm = dicke::x_minus(p.N, i);
    const double xp = dicke::x_plus(p.N, i);
    CHECK(rb.up_total[i] ==
          doctest::Approx((p.gamma_s * p.n_s + p.gamma_d * p.n_d) * xm)
              .epsilon(1e-15));
    CHECK(rb.down_total[i] ==
          doctest::Approx((p.gamma_s * (1 + p.n_s) + p.gamma_d * (1 + p.n_d)) * xp)
              .epsilon(1e-15));
    CHECK(rb.up_drain[i] ==
          doctest::Approx(p.gamma_d * p.n_d * xm).epsilon(1e-15));
    CHECK(rb.down_drain[i] ==
          doctest::Approx(p.gamma_d * (1 + p.n_d) * xp).epsilon(1e-15));
  }
}

TEST_CASE("stationary state is the truncated geometric distribution") {
  // N = 1, n_bar = 1/2: populations (3/4, 1/4), <J_z> = -1/2, <J_z^2> = 1.
  const auto p1 = params(1, 1.0);
  const auto ss = dicke::stationary_state(p1);
  REQUIRE(ss.populations.size() == 2);
  CHECK(ss.populations[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(ss.populations[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(dicke::exact_moment(p1, 1) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(dicke::exact_moment(p1, 2) == doctest::Approx(1.0).epsilon(1e-14));

  // Detailed balance: p_{i+1}/p_i = n_bar/(1+n_bar) along the whole ladder,
  // and the populations are normalized.
  const auto p2 = params(40, 3.2, 0.8, 0.9, 2.1);
  const auto bath = dicke::effective_bath(p2);
  const auto ss2 = dicke::stationary_state(p2);
  double norm = 0.0;
  for (double v : ss2.populations) norm += v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 0; i < p2.N; ++i)
    CHECK(ss2.populations[i + 1] / ss2.populations[i] ==
          doctest::Approx(bath.ratio).epsilon(1e-13));

  // Zero-temperature limit: everything sits in the bottom slot.
  const auto p0 = params(6, 0.0);
  const auto ss0 = dicke::stationary_state(p0);
  CHECK(ss0.populations[0] == 1.0);
  for (int i = 1; i <= 6; ++i) CHECK(ss0.populations[i] == 0.0);
}

TEST_CASE("stationary moment identity holds with compensated summation") {
  // -(2 n_bar + 1) <J_z> + <J_z^2>/2 - N(N+2)/2 = 0 for the geometric state.
  for (const auto& p : {params(1, 1.0), params(20, 0.01), params(80, 1000.0),
                        params(80, 1e-3, 5.0, 1.0, 5.0)}) {
    const double nb = dicke::effective_bath(p).n_bar;
    const double j2 = static_cast<double>(p.N) * (p.N + 2.0);
    const double resid = -(2.0 * nb + 1.0) * dicke::exact_moment(p, 1) +
                         0.5 * dicke::exact_moment(p, 2) - 0.5 * j2;
    CHECK(std::abs(resid) < 1e-10);
  }
}

TEST_CASE("sigma_n matches a long-double evaluation of the closed ratio") {
  // Direct formula, safe in long double for moderate N and n_bar:
  // [(N - 2n)(1+n)^K + n^K (2 + N + 2n)] / [(1+n)^K - n^K], K = N + 1.
  auto direct = [](int N, long double n) {
    const long double K = N + 1;
    const long double a = std::pow(1.0L + n, K);
    const long double b = std::pow(n, K);
    return static_cast<double>(((N - 2.0L * n) * a + b * (2.0L + N + 2.0L * n)) /
                               (a - b));
  };
  for (int N : {1, 2, 7, 40, 200}) {
    for (double nb : {1e-3, 0.3, 1.0, 8.0, 50.0}) {
      CHECK(dicke::sigma_n(N, nb) ==
            doctest::Approx(direct(N, nb)).epsilon(1e-12));
    }
  }
  // Extremes where the direct form would overflow or cancel catastrophically.
  CHECK(dicke::sigma_n(10, 1e-12) == doctest::Approx(10.0).epsilon(1e-11));
  CHECK(dicke::sigma_n(10, 1e8) ==
        doctest::Approx(10.0 * 12.0 / (6.0 * 1e8)).epsilon(1e-5));
  CHECK(dicke::sigma_n(100000, 1.0) > 0.0);
}

TEST_CASE("closed first cumulant: value, sign, and reciprocity") {
  // N = 1, gamma_s = gamma_d = 1, n_s = 1, n_d = 0: <<I_1>> = 1/4.
  CHECK(dicke::first_cumulant_closed_form(params(1, 1.0)) ==
        doctest::Approx(0.25).epsilon(1e-14));
  // Zero bias -> zero current, exactly.
  CHECK(dicke::first_cumulant_closed_form(params(13, 0.8, 0.8)) == 0.0);
  // Reversing the bias flips the sign of the current only.
  const double fwd = dicke::first_cumulant_closed_form(params(7, 2.0, 0.5));
  const double rev = dicke::first_cumulant_closed_form(params(7, 0.5, 2.0));
  CHECK(fwd > 0.0);
  CHECK(fwd == doctest::Approx(-rev).epsilon(1e-12));
}

TEST_CASE("apply_generator multiplies by the band matrix and checks sizes") {
  const auto p = params(2, 1.0);
  const auto gen = dicke::build_tilted_generator(p, CountingField(0.9));
  const std::vector<complex> v = {complex(0.2, -0.1), complex(0.5, 0.0),
                                  complex(-0.3, 0.4)};
  const auto y = dicke::apply_generator(gen, v);
  REQUIRE(y.size() == 3);
  // Dense multiply with the oracle bands: column i holds diag[i] and up[i];
  // column i+1 contributes down[i+1] to row i.
  const complex eich = std::exp(complex(0.0, 0.9));
  const complex d = 4.0 + 2.0 * eich;
  CHECK(std::abs(y[0] - (-2.0 * v[0] + d * v[1])) < 1e-14);
  CHECK(std::abs(y[1] - (2.0 * v[0] - 8.0 * v[1] + d * v[2])) < 1e-14);
  CHECK(std::abs(y[2] - (2.0 * v[1] - 6.0 * v[2])) < 1e-14);

  const std::vector<complex> wrong = {complex(1.0, 0.0)};
  CHECK_THROWS_AS((void)dicke::apply_generator(gen, wrong), std::exception);

  // Serial and OpenMP paths agree bitwise.
  const auto ys = dicke::apply_generator(gen, v, dicke::kernels::Exec::serial);
  const auto yp = dicke::apply_generator(gen, v, dicke::kernels::Exec::openmp);
  for (std::size_t i = 0; i < ys.size(); ++i) CHECK(ys[i] == yp[i]);
}

TEST_CASE("band dump emits one row per ladder slot") {
  const auto gen =
      dicke::build_tilted_generator(params(3, 0.5), CountingField(0.3));
  std::ostringstream os;
  dicke::dump_bands_csv(gen, os);
  const std::string text = os.str();
  std::size_t rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 5);  // header + N + 1 data rows
  CHECK(text.rfind("m,diag_re", 0) == 0);
  CHECK(text.find("\n-1.5,") != std::string::npos);  // m ranges -N/2 .. N/2
  CHECK(text.find("\n1.5,") != std::string::npos);
}
