// fcs.hpp — full counting statistics of the drain-boson number: dominant
// eigenvalue of the tilted generator, stationary current cumulants, transient
// cumulant generating function, and the counting distribution.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "dicke/kernels.hpp"
#include "dicke/liouvillian.hpp"
#include "dicke/model.hpp"

namespace dicke::fcs {

enum class CumulantMethod {
  eigenvalue_recursion,  // perturbative expansion of the dominant eigenvalue
  finite_difference,     // numeric chi-derivatives of the dominant eigenvalue
  analytic_n1,           // closed form, N = 1 only
  eom_closure,           // moment-closure approximation (eom module)
};

struct CumulantSet {
  int order = 0;
  std::vector<double> values;  // values[k-1] = k-th stationary cumulant rate
  CumulantMethod method = CumulantMethod::eigenvalue_recursion;
  std::vector<std::string> warnings;
};

struct EigenvalueOptions {
  double chi_step = 0.05;    // continuation step along the real chi path
  int dense_dim_limit = 256; // larger dimensions use inverse iteration
  double tol = 1e-12;        // residual tolerance (relative to rate scale)
  int max_iterations = 200;  // inverse-iteration limit per continuation step
};

// Eigenvalue branch of L(chi) continuously connected to 0 at chi = 0,
// tracked by stepping chi from 0 (nearest-eigenvalue matching with an
// eigenvector-overlap tie-break). chi is first reduced to the principal
// interval (-pi, pi]; the generator is exactly 2*pi-periodic. Throws
// std::runtime_error when branch tracking is ambiguous (reduce chi_step).
complex dominant_eigenvalue(const ModelParams& p, double chi,
                            const EigenvalueOptions& opt = {});

// Same branch evaluated along an ascending grid of nonnegative chi values in
// one continuation walk (cheaper and guaranteed-consistent tracking).
std::vector<complex> dominant_eigenvalue_scan(const ModelParams& p,
                                              std::span<const double> chis,
                                              const EigenvalueOptions& opt = {});

// Stationary cumulant rates 1..order (order <= 6) from the perturbative
// expansion of the dominant eigenvalue around chi = 0: order-by-order
// projections plus trace-orthogonal corrections obtained from the singular
// generator restricted to the trace-zero complement (O(N) per order).
CumulantSet stationary_cumulants(const ModelParams& p, int order);

struct FiniteDifferenceOptions {
  double step = 0.0;       // > 0: fixed base step; 0: automatic step ladder
  double tolerance = 1e-6; // estimated-error threshold for warnings
  EigenvalueOptions eigen;
};

// Independent cross-check: 5-point central differences of the dominant
// eigenvalue in chi, orders <= 4. With an explicit `step` the stencil is
// evaluated at that base step with one Richardson extrapolation level; with
// the default step = 0 the same estimator runs twice-extrapolated on a
// geometric ladder of base steps and keeps the best-agreeing run of three
// (no single fixed step is accurate across all parameter regimes). Emits a
// warning when the estimated truncation + roundoff error of any requested
// order exceeds `tolerance` relative to that cumulant.
CumulantSet cross_check_cumulants(const ModelParams& p, int order,
                                  const FiniteDifferenceOptions& opt = {});

// Closed-form cumulant generating function for N = 1 (t times the dominant
// eigenvalue of the 2x2 tilted generator),
//   C(chi,t) = -(t/2) [ a - sqrt(A + B e^{i chi} + C e^{-i chi}) ],
//   a = gamma_s(1+2n_s) + gamma_d(1+2n_d),
//   A = (gamma_s+gamma_d)^2 + 4 gamma_s^2 n_s(1+n_s) + 4 gamma_d^2 n_d(1+n_d),
//   B = 4 gamma_s gamma_d n_s(1+n_d),  C = 4 gamma_s gamma_d n_d(1+n_s),
// with the square-root branch continuously connected to +a at chi = 0.
complex analytic_cgf_n1(const ModelParams& p, CountingField chi, double t);

// Cumulant rates 1..order (order <= 6) by Taylor expansion of the N = 1
// closed form (power-series square root; no finite differencing).
CumulantSet analytic_cumulants_n1(const ModelParams& p, int order);

struct OdeOptions {
  double rtol = 1e-9;        // per-step relative error control
  int max_steps = 4000000;   // safety limit before reporting failure
};

struct TransientCgf {
  complex chi{0.0, 0.0};
  std::vector<double> times;
  std::vector<complex> values;  // C(chi, t) = ln tr p(chi, t), phase-unwrapped
};

// Integrates dp/dt = L(chi) p with an adaptive embedded Runge-Kutta 4(5)
// pair from the stationary state (or an explicit normalized population
// vector) and samples C(chi, t) at num_samples uniform times in (0, t_final].
TransientCgf propagate_transient(const ModelParams& p, CountingField chi,
                                 double t_final, int num_samples = 100,
                                 const OdeOptions& opt = {});
TransientCgf propagate_transient_from(const ModelParams& p, CountingField chi,
                                      double t_final,
                                      std::span<const double> initial,
                                      int num_samples = 100,
                                      const OdeOptions& opt = {});

// Slope of C(chi, t) between the two ends of the trailing half of the sample
// window; converges to the dominant eigenvalue at late times.
complex late_time_slope(const TransientCgf& transient);

struct DistributionOptions {
  OdeOptions ode;
  double tail_tol = 1e-10;       // aliasing guard at the index boundary
  double negativity_tol = 1e-9;  // tolerated numerical negativity
  double norm_tol = 1e-10;       // total-probability drift guard
  kernels::Exec exec = kernels::Exec::openmp;
};

struct CountingDistribution {
  int n_min = 0;  // probabilities[j] belongs to net count n = n_min + j
  std::vector<double> probabilities;
  double mean() const;
  double variance() const;
};

// Counting distribution P_n(t) for n in [-n_max, n_max], by inverse discrete
// Fourier transform of tr p(chi_k, t) on 2*n_max + 2 uniform chi points
// (each chi point is an independent propagation; conjugate symmetry halves
// the work). Throws when the boundary tail mass exceeds tail_tol (increase
// n_max), when probabilities dip below -negativity_tol, or when the total
// probability drifts by more than norm_tol.
CountingDistribution counting_distribution(const ModelParams& p, double t,
                                           int n_max,
                                           const DistributionOptions& opt = {});

}  // namespace dicke::fcs
