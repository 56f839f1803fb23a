// eom.cpp — closure steady states, factorized CGF forms, scaling limits, and
// the exact-propagation factorization-error diagnostic.
#include "dicke/eom.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "dicke/liouvillian.hpp"

namespace dicke::eom {

namespace {

constexpr complex kI{0.0, 1.0};

double big_j_squared(int N) { return static_cast<double>(N) * (N + 2.0); }

// sqrt(h^2 + J2) - h evaluated as J2 / (h + sqrt(h^2 + J2)), which keeps full
// precision when h^2 dominates J2 (large n_bar) instead of cancelling.
double root_gap(double h, double J2) {
  return J2 / (h + std::sqrt(h * h + J2));
}

}  // namespace

complex factored_cgf_rate(const ModelParams& p, double jz1, double jz2,
                          CountingField chi) {
  p.validate();
  const double J2 = big_j_squared(p.N);
  const complex f = counting_kernel(chi, p.gamma_d);
  const complex fm = counting_kernel(CountingField(-chi.value), p.gamma_d);
  return p.n_d * (f - fm) * jz1 + 0.5 * p.n_d * (f + fm) * (J2 - jz2) +
         0.5 * f * (J2 - jz2 + 2.0 * jz1);
}

ClosureResult closure_steady_state(const ModelParams& p, ClosureKind kind) {
  p.validate();
  const double nb = effective_bath(p).n_bar;
  const double u = 2.0 * nb + 1.0;
  const double J2 = big_j_squared(p.N);

  ClosureResult r;
  r.kind = kind;
  switch (kind) {
    case ClosureKind::approx1:
      // Moments of the exact stationary populations; the amplitude uses the
      // closed form of -<J_z>, which stays accurate for every n_bar.
      r.amplitude = sigma_n(p.N, nb);
      r.jz1 = exact_moment(p, 1);
      r.jz2 = exact_moment(p, 2);
      break;
    case ClosureKind::approx2:
      // Attracting root of 0 = -(2n+1) a + a^2/2 - J2/2; the repelling root
      // (2n+1) + sqrt(...) >= N + 2 never lies in [-N, N].
      r.amplitude = root_gap(u, J2);
      r.jz1 = -r.amplitude;
      r.jz2 = r.jz1 * r.jz1;
      break;
    case ClosureKind::approx3: {
      // Substituting the stationary second moment b = 2(2n+1) a + J2 into the
      // third-moment equation gives a^2 - g a - J2 = 0; the branch through
      // the ground state (-N, N^2) at n_bar = 0 is the negative root.
      const double g = 3.0 * u - 1.0 / u;  // >= 2 for all n_bar >= 0
      r.amplitude = root_gap(0.5 * g, J2);
      r.jz1 = -r.amplitude;
      r.jz2 = 2.0 * u * r.jz1 + J2;
      break;
    }
  }
  const double slack = 1e-12 * p.N;
  if (!(r.jz1 >= -p.N - slack && r.jz1 <= slack))
    throw std::runtime_error("closure_steady_state: selected root left [-N, 0]");
  return r;
}

complex common_function(const ModelParams& p, CountingField chi, double t) {
  p.validate();
  if (!(t >= 0.0))
    throw std::invalid_argument("common_function: t must be >= 0");
  const double nb = effective_bath(p).n_bar;
  const complex ep = std::exp(kI * chi.value) - 1.0;
  const complex em = std::exp(-kI * chi.value) - 1.0;
  return p.gamma_d * t * ((p.n_d + 1.0) * nb * ep + p.n_d * (nb + 1.0) * em);
}

complex approximate_cgf(const ModelParams& p, ClosureKind kind,
                        CountingField chi, double t) {
  return common_function(p, chi, t) * closure_steady_state(p, kind).amplitude;
}

std::pair<double, double> odd_even_cumulant_rates(const ModelParams& p,
                                                  double jz1, double jz2) {
  p.validate();
  const double J2 = big_j_squared(p.N);
  const double odd =
      p.gamma_d * (p.n_d * jz1 + 0.25 * (J2 - jz2 + 2.0 * jz1));
  const double even = 0.5 * p.gamma_d * ((p.n_d + 0.5) * (J2 - jz2) + jz1);
  return {odd, even};
}

complex LimitForm::evaluate(CountingField chi, double t) const {
  const complex ep = std::exp(kI * chi.value) - 1.0;
  switch (regime) {
    case LimitRegime::linear:
      return coefficient * static_cast<double>(params.N) *
             common_function(params, chi, t);
    case LimitRegime::super_transmittance: {
      const complex em = std::exp(-kI * chi.value) - 1.0;
      return coefficient * (ep * (1.0 + params.n_d) + em * params.n_d) * t;
    }
    case LimitRegime::low_bias:
      return coefficient * ep * t;
  }
  return {};  // unreachable: all enumerators handled above
}

LimitForm thermodynamic_limit(const ModelParams& p, ClosureKind kind,
                              LimitRegime regime) {
  p.validate();
  const double nb = effective_bath(p).n_bar;
  LimitForm form;
  form.regime = regime;
  form.kind = kind;
  form.params = p;
  switch (regime) {
    case LimitRegime::linear:
      if (!(nb <= 0.01 * p.N))
        throw std::invalid_argument(
            "thermodynamic_limit: linear regime requires n_bar <= N/100");
      form.coefficient = 1.0;
      break;
    case LimitRegime::super_transmittance:
      if (!(nb >= 100.0 * p.N))
        throw std::invalid_argument(
            "thermodynamic_limit: super_transmittance regime requires "
            "n_bar >= 100 N");
      form.coefficient = p.gamma_d * big_j_squared(p.N) /
                         (kind == ClosureKind::approx2 ? 4.0 : 6.0);
      break;
    case LimitRegime::low_bias:
      if (!(p.n_s <= 0.01 && p.n_d == 0.0))
        throw std::invalid_argument(
            "thermodynamic_limit: low_bias regime requires n_s <= 0.01 and "
            "n_d = 0");
      form.coefficient =
          p.gamma_s * p.gamma_d * p.n_s * p.N / (p.gamma_s + p.gamma_d);
      break;
  }
  return form;
}

FactorizationError factorization_error(const ModelParams& p, CountingField chi,
                                       double t, int alpha) {
  p.validate();
  if (alpha != 1 && alpha != 2)
    throw std::invalid_argument("factorization_error: alpha must be 1 or 2");
  if (p.N > 20)
    throw std::invalid_argument(
        "factorization_error: N <= 20 required (dense propagation)");
  if (!(t >= 0.0))
    throw std::invalid_argument("factorization_error: t must be >= 0");

  const TiltedGenerator gen = build_tilted_generator(p, chi);
  const int dim = p.N + 1;
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    L(i, i) = gen.diag[static_cast<std::size_t>(i)];
    if (i + 1 < dim) {
      L(i + 1, i) = gen.up[static_cast<std::size_t>(i)];
      L(i, i + 1) = gen.down[static_cast<std::size_t>(i) + 1];
    }
  }

  const StationaryState ss = stationary_state(p);
  Eigen::VectorXcd v0(dim);
  for (int i = 0; i < dim; ++i) v0[i] = ss.populations[static_cast<std::size_t>(i)];

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("factorization_error: eigendecomposition failed");
  const Eigen::VectorXcd coeff = es.eigenvectors().partialPivLu().solve(v0);
  Eigen::VectorXcd vt = Eigen::VectorXcd::Zero(dim);
  for (int k = 0; k < dim; ++k)
    vt += coeff[k] * std::exp(es.eigenvalues()[k] * t) * es.eigenvectors().col(k);

  complex trace{0.0, 0.0};
  complex joint{0.0, 0.0};
  for (int i = 0; i < dim; ++i) {
    const double jz = 2.0 * i - p.N;
    trace += vt[i];
    joint += (alpha == 1 ? jz : jz * jz) * vt[i];
  }

  const double moment = exact_moment(p, alpha);
  const complex factored = trace * moment;
  const double diff = std::abs(joint - factored);
  const double scale = std::pow(static_cast<double>(p.N), alpha);

  FactorizationError out;
  // Degenerate when the stationary moment vanishes, or when the tilted trace
  // has decayed below representable range; both leave no meaningful ratio.
  if (std::abs(moment) < 1e-9 * scale || std::abs(factored) == 0.0) {
    out.value = diff;
    out.absolute = true;
  } else {
    out.value = diff / std::abs(factored);
    out.absolute = false;
  }
  return out;
}

}  // namespace dicke::eom
