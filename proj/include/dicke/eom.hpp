// eom.hpp — moment-closure treatment of the counting statistics: the
// factorized CGF rate equation, three closure levels with analytic stationary
// moments, the closed-form scaling limits, and a factorization-error
// diagnostic based on exact tilted propagation.
#pragma once

#include <utility>

#include "dicke/model.hpp"

namespace dicke::eom {

// Truncation level of the moment hierarchy. Factorizing the joint counting /
// collective-inversion expectation values turns the CGF evolution into a
// scalar equation driven by <J_z> and <J_z^2>; the three closures differ in
// where those two moments come from.
enum class ClosureKind {
  approx1,  // moments of the exact stationary populations
  approx2,  // <J_z^2> ~ <J_z>^2: a single quadratic fixed point
  approx3,  // <J_z^3> ~ <J_z><J_z^2>: a coupled pair, solved in closed form
};

// Stationary moments selected by a closure, plus the scalar amplitude that
// multiplies the shared chi/t factor (common_function) in the closure CGF.
// At any stationary point the moment identity J^2 - jz2 = -2(2 n_bar + 1) jz1
// holds, which collapses the CGF to amplitude = -jz1.
struct ClosureResult {
  ClosureKind kind = ClosureKind::approx1;
  double jz1 = 0.0;        // stationary <J_z>
  double jz2 = 0.0;        // stationary <J_z^2>
  double amplitude = 0.0;  // > 0; -> N as n_bar -> 0, -> 0 as n_bar -> inf
};

// Right-hand side of the factorized CGF evolution for arbitrary moment input,
// with f[chi] = (gamma_d/2)(e^{i chi} - 1) and J2 = N(N+2):
//   dC/dt = n_d (f[chi] - f[-chi]) jz1
//         + (n_d/2)(f[chi] + f[-chi]) (J2 - jz2)
//         + (f[chi]/2) (J2 - jz2 + 2 jz1).
complex factored_cgf_rate(const ModelParams& p, double jz1, double jz2,
                          CountingField chi);

// Stationary moments and amplitude under the chosen closure.
//  - approx1: jz1, jz2 from the exact stationary populations; the amplitude is
//    evaluated through the cancellation-free closed form of -<J_z>.
//  - approx2: jz1 = (2n+1) - sqrt((2n+1)^2 + J2) (the attracting root of the
//    quadratic flow), jz2 = jz1^2, n = n_bar.
//  - approx3: the stationary pair of the coupled <J_z>, <J_z^2> equations,
//    taking the branch that connects to the ground state (-N, N^2) at
//    n_bar = 0; reduces to a quadratic with g = 3(2n+1) - 1/(2n+1).
// All amplitudes are computed in rationalized form, so no digits are lost at
// large n_bar. Throws std::runtime_error if the selected root ever leaves
// [-N, 0] (not expected; defensive guard on the root choice).
ClosureResult closure_steady_state(const ModelParams& p, ClosureKind kind);

// Shared chi/t factor of every closure CGF:
//   F(chi, t) = gamma_d t [ (e^{i chi} - 1)(n_d + 1) n_bar
//                         + (e^{-i chi} - 1) n_d (n_bar + 1) ].
// F(0, t) = 0, and F(-chi, t) = conj(F(chi, t)) for real chi.
complex common_function(const ModelParams& p, CountingField chi, double t);

// Closure CGF: C(chi, t) = common_function(p, chi, t) * amplitude(kind).
complex approximate_cgf(const ModelParams& p, ClosureKind kind,
                        CountingField chi, double t);

// Cumulant production rates implied by the factorized CGF for a given moment
// pair: every odd order shares the first value, every even order the second.
//   odd  = gamma_d [ n_d jz1 + (J2 - jz2 + 2 jz1)/4 ]
//   even = (gamma_d/2) [ (n_d + 1/2)(J2 - jz2) + jz1 ]
// With stationary closure moments these equal gamma_d (n_bar - n_d) and
// gamma_d (n_bar + n_d + 2 n_bar n_d) times the closure amplitude.
std::pair<double, double> odd_even_cumulant_rates(const ModelParams& p,
                                                  double jz1, double jz2);

// Scaling regimes in which every closure CGF collapses to a closed form.
enum class LimitRegime {
  linear,               // n_bar << N: C/N -> F(chi, t)
  super_transmittance,  // n_bar >> N: C -> gamma_d N(N+2)/x * shape, x = 4 or 6
  low_bias,             // n_s << 1, n_d = 0: C -> gs gd/(gs+gd) n_s N shape
};

// Closed-form limit: coefficient times a fixed regime shape function.
//  - linear:              C(chi,t) = coefficient * N * F(chi,t), coefficient 1.
//  - super_transmittance: C(chi,t) = coefficient *
//        [(e^{i chi}-1)(1+n_d) + (e^{-i chi}-1) n_d] * t,
//        coefficient = gamma_d N(N+2)/x with x = 4 for approx2, else 6.
//  - low_bias:            C(chi,t) = coefficient * (e^{i chi}-1) * t,
//        coefficient = gamma_s gamma_d n_s N / (gamma_s + gamma_d).
struct LimitForm {
  LimitRegime regime = LimitRegime::linear;
  ClosureKind kind = ClosureKind::approx1;
  double coefficient = 0.0;
  ModelParams params;  // parameters the form was built for

  // Predicted CGF at (chi, t) in this regime.
  complex evaluate(CountingField chi, double t) const;
};

// Builds the closed-form limit after checking the regime's validity window:
// linear requires n_bar <= N/100, super_transmittance n_bar >= 100 N, and
// low_bias n_s <= 0.01 with n_d = 0. Throws std::invalid_argument outside
// the window.
LimitForm thermodynamic_limit(const ModelParams& p, ClosureKind kind,
                              LimitRegime regime);

// Factorization-error diagnostic. Propagates the tilted populations exactly
// (dense, N <= 20) from the stationary state for time t and compares the
// joint expectation against its factorized stand-in:
//   value = |<e^{in chi} J_z^alpha> - <e^{in chi}><J_z^alpha>|
//           / |<e^{in chi}><J_z^alpha>|,          alpha in {1, 2}.
// When the stationary moment <J_z^alpha> is degenerate (|.| < 1e-9 N^alpha,
// e.g. odd alpha at equipartition) the unnormalized error is returned instead
// and `absolute` is set.
struct FactorizationError {
  double value = 0.0;
  bool absolute = false;
};
FactorizationError factorization_error(const ModelParams& p, CountingField chi,
                                       double t, int alpha);

}  // namespace dicke::eom
