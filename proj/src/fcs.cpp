// fcs.cpp — dominant-eigenvalue tracking, cumulant recursion, transient
// propagation and counting-distribution reconstruction.
#include "dicke/fcs.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dicke::fcs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr complex kI{0.0, 1.0};

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// Largest loss rate; the natural frequency scale of the generator.
double rate_scale(const TiltedGenerator& gen) {
  double s = 0.0;
  for (const complex& d : gen.diag) s = std::max(s, std::abs(d));
  return s;
}

complex compensated_trace(std::span<const complex> v) {
  double re = 0.0, rec = 0.0, im = 0.0, imc = 0.0;
  for (const complex& z : v) {
    double t = re + z.real();
    if (std::abs(re) >= std::abs(z.real()))
      rec += (re - t) + z.real();
    else
      rec += (z.real() - t) + re;
    re = t;
    t = im + z.imag();
    if (std::abs(im) >= std::abs(z.imag()))
      imc += (im - t) + z.imag();
    else
      imc += (z.imag() - t) + im;
    im = t;
  }
  return {re + rec, im + imc};
}

// ---------------------------------------------------------------------------
// Dominant-eigenvalue branch tracking
// ---------------------------------------------------------------------------

struct BranchState {
  complex lambda{0.0, 0.0};
  std::vector<complex> vec;  // unit 2-norm eigenvector estimate
};

BranchState initial_branch_state(const ModelParams& p) {
  BranchState st;
  st.lambda = 0.0;
  const StationaryState stat = stationary_state(p);
  st.vec.assign(stat.populations.begin(), stat.populations.end());
  double nrm = 0.0;
  for (const complex& z : st.vec) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  for (complex& z : st.vec) z /= nrm;
  return st;
}

void polish_eigenpair(const ModelParams& p, const TiltedGenerator& gen,
                      BranchState& st);

Eigen::MatrixXcd dense_matrix(const TiltedGenerator& gen) {
  const int d = gen.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = gen.diag[i];
    if (i + 1 < d) m(i + 1, i) = gen.up[i];
    if (i > 0) m(i - 1, i) = gen.down[i];
  }
  return m;
}

// One continuation step via full diagonalization: nearest eigenvalue to the
// previous branch value, eigenvector overlap as tie-break.
void dense_step(const ModelParams& p, double chi, BranchState& st) {
  const TiltedGenerator gen = build_tilted_generator(p, CountingField(chi));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(dense_matrix(gen));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("dominant_eigenvalue: dense eigensolver failed");
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  const int d = static_cast<int>(vals.size());

  double d1 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < d; ++j)
    d1 = std::min(d1, std::abs(vals[j] - st.lambda));
  const double cutoff = 1.25 * d1 + 1e-14 * rate_scale(gen);

  Eigen::Map<const Eigen::VectorXcd> prev(st.vec.data(),
                                          static_cast<Eigen::Index>(st.vec.size()));
  int best = -1, runner = -1;
  double best_ov = -1.0, runner_ov = -1.0;
  int n_candidates = 0;
  for (int j = 0; j < d; ++j) {
    if (std::abs(vals[j] - st.lambda) > cutoff) continue;
    ++n_candidates;
    const double ov = std::abs(prev.dot(vecs.col(j)));
    if (ov > best_ov) {
      runner = best;
      runner_ov = best_ov;
      best = j;
      best_ov = ov;
    } else if (ov > runner_ov) {
      runner = j;
      runner_ov = ov;
    }
  }
  if (n_candidates > 1 && runner >= 0 && runner_ov > 0.95 * best_ov)
    throw std::runtime_error(
        "dominant_eigenvalue: branch tracking ambiguous; reduce chi_step");
  st.lambda = vals[best];
  const Eigen::VectorXcd v = vecs.col(best);
  st.vec.assign(v.data(), v.data() + v.size());
  polish_eigenpair(p, gen, st);
}

// Tridiagonal LU with partial pivoting for (L - shift I); one extra
// superdiagonal of fill.
struct TridiagLU {
  std::vector<complex> dl, dd, du, du2;
  std::vector<int> pivoted;  // pivoted[i] != 0: rows i, i+1 swapped

  // Factors (T - shift I) where T has sub/diag/super bands; sub[i] is the
  // (i+1, i) entry and super[i] the (i, i+1) entry.
  TridiagLU(std::span<const complex> sub, std::span<const complex> diag,
            std::span<const complex> super, complex shift) {
    const int n = static_cast<int>(diag.size());
    dl.resize(n - 1);
    dd.resize(n);
    du.resize(n - 1);
    du2.assign(std::max(n - 2, 0), complex{0.0, 0.0});
    pivoted.assign(std::max(n - 1, 0), 0);
    for (int i = 0; i < n; ++i) dd[i] = diag[i] - shift;
    for (int i = 0; i + 1 < n; ++i) {
      dl[i] = sub[i];
      du[i] = super[i];
    }
    const double tiny =
        std::numeric_limits<double>::min() + 1e-30 * std::abs(shift);
    for (int i = 0; i + 1 < n; ++i) {
      if (std::abs(dd[i]) >= std::abs(dl[i])) {
        if (std::abs(dd[i]) == 0.0) dd[i] = tiny;  // exactly singular shift
        const complex f = dl[i] / dd[i];
        dl[i] = f;
        dd[i + 1] -= f * du[i];
      } else {
        pivoted[i] = 1;
        const complex f = dd[i] / dl[i];
        dd[i] = dl[i];
        dl[i] = f;
        const complex tmp = du[i];
        du[i] = dd[i + 1];
        dd[i + 1] = tmp - f * dd[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -f * du[i + 1];
        }
      }
    }
    if (std::abs(dd[n - 1]) == 0.0) dd[n - 1] = tiny;
  }

  void solve(std::vector<complex>& b) const {
    const int n = static_cast<int>(dd.size());
    for (int i = 0; i + 1 < n; ++i) {
      if (!pivoted[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const complex tmp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = tmp - dl[i] * b[i];
      }
    }
    b[n - 1] /= dd[n - 1];
    if (n >= 2) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2];
    for (int i = n - 3; i >= 0; --i)
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i];
  }
};

void matvec(const TiltedGenerator& gen, std::span<const complex> v,
            std::span<complex> out) {
  kernels::apply_tridiag(gen.diag, gen.up, gen.down, v, out,
                         kernels::Exec::serial);
}

TridiagLU shifted_lu(const TiltedGenerator& gen, complex shift) {
  const std::size_t n = gen.diag.size();
  return TridiagLU({gen.up.data(), n - 1}, gen.diag,
                   {gen.down.data() + 1, n - 1}, shift);
}

void normalize2(std::vector<complex>& v) {
  double nrm = 0.0;
  for (const complex& z : v) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  if (!std::isfinite(nrm) || nrm == 0.0) {
    v.clear();  // signal failure to the caller
    return;
  }
  for (complex& z : v) z /= nrm;
}

// Two-sided Rayleigh-quotient polish of an eigenpair estimate: refine the
// right vector by one shifted solve, get a matching left vector from the
// adjoint solve, and take lambda = <y|L|x>/<y|x>. The quotient is stationary
// in x and y, so vector error enters only at second order; what limits it is
// the rounding of the matrix entries it is evaluated against. Evaluating it
// with extended-precision bands therefore pushes the eigenvalue error from
// eps * ||L|| down to long-double rounding — the difference is invisible in
// lambda itself but decisive for high-order chi-derivatives of the branch,
// which amplify entry rounding like step^-order.
void polish_eigenpair(const ModelParams& p, const TiltedGenerator& gen,
                      BranchState& st) {
  const std::size_t n = gen.diag.size();
  std::vector<complex> sub_adj(n - 1), diag_adj(n), super_adj(n - 1);
  for (std::size_t i = 0; i < n; ++i) diag_adj[i] = std::conj(gen.diag[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sub_adj[i] = std::conj(gen.down[i + 1]);
    super_adj[i] = std::conj(gen.up[i]);
  }
  const ExtendedBands ext = build_extended_bands(p, CountingField(gen.chi));
  using longc = std::complex<long double>;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<complex> x = st.vec;
    {
      TridiagLU lu = shifted_lu(gen, st.lambda);
      lu.solve(x);
      normalize2(x);
      if (x.empty()) return;
    }
    std::vector<complex> y = x;
    {
      TridiagLU lu(sub_adj, diag_adj, super_adj, std::conj(st.lambda));
      lu.solve(y);
      normalize2(y);
      if (y.empty()) return;
    }
    longc num{0.0L, 0.0L}, den{0.0L, 0.0L};
    for (std::size_t i = 0; i < n; ++i) {
      longc row = ext.diag[i] * longc(x[i]);
      if (i > 0) row += ext.up[i - 1] * longc(x[i - 1]);
      if (i + 1 < n) row += ext.down[i + 1] * longc(x[i + 1]);
      num += std::conj(longc(y[i])) * row;
      den += std::conj(longc(y[i])) * longc(x[i]);
    }
    if (std::abs(den) < 1e-8L) return;  // nearly defective; keep the estimate
    const longc q = num / den;
    const complex lambda(static_cast<double>(q.real()),
                         static_cast<double>(q.imag()));
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) return;
    st.lambda = lambda;
    st.vec = std::move(x);
  }
}

// One continuation step via shifted inverse iteration with Rayleigh-quotient
// shift updates (for dimensions past the dense limit).
void inverse_iteration_step(const ModelParams& p, double chi, BranchState& st,
                            const EigenvalueOptions& opt) {
  const TiltedGenerator gen = build_tilted_generator(p, CountingField(chi));
  const int n = gen.dim();
  const double scale = rate_scale(gen);
  complex shift = st.lambda;
  std::vector<complex> v = st.vec, w(n), lv(n);
  for (int it = 0; it < opt.max_iterations; ++it) {
    TridiagLU lu = shifted_lu(gen, shift);
    w = v;
    lu.solve(w);
    double nrm = 0.0;
    for (const complex& z : w) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    if (!std::isfinite(nrm) || nrm == 0.0) {
      shift += complex(1e-12 * scale, 1e-12 * scale);
      continue;
    }
    for (complex& z : w) z /= nrm;
    matvec(gen, w, lv);
    complex num{0.0, 0.0};
    for (int i = 0; i < n; ++i) num += std::conj(w[i]) * lv[i];
    const complex lambda = num;  // w has unit norm
    double resid = 0.0;
    for (int i = 0; i < n; ++i)
      resid = std::max(resid, std::abs(lv[i] - lambda * w[i]));
    v = w;
    if (resid <= opt.tol * scale) {
      st.lambda = lambda;
      st.vec = v;
      polish_eigenpair(p, gen, st);
      return;
    }
    shift = lambda;
  }
  throw std::runtime_error(
      "dominant_eigenvalue: inverse iteration did not converge; reduce "
      "chi_step");
}

void continuation_step(const ModelParams& p, double chi, BranchState& st,
                       const EigenvalueOptions& opt) {
  if (p.N + 1 <= opt.dense_dim_limit)
    dense_step(p, chi, st);
  else
    inverse_iteration_step(p, chi, st, opt);
}

// Walks the branch from `from_chi` to `to_chi` in increments <= chi_step.
void walk_branch(const ModelParams& p, double from_chi, double to_chi,
                 BranchState& st, const EigenvalueOptions& opt) {
  if (!(opt.chi_step > 0.0))
    throw std::invalid_argument("EigenvalueOptions: chi_step must be > 0");
  const double span = to_chi - from_chi;
  if (span == 0.0) return;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / opt.chi_step)));
  for (int k = 1; k <= steps; ++k)
    continuation_step(p, from_chi + span * k / steps, st, opt);
}

double reduce_principal(double chi) {
  double r = std::remainder(chi, 2.0 * kPi);
  if (r <= -kPi) r = kPi;  // the interval is (-pi, pi]
  return r;
}

}  // namespace

complex dominant_eigenvalue(const ModelParams& p, double chi,
                            const EigenvalueOptions& opt) {
  p.validate();
  const double chi_r = reduce_principal(chi);
  if (chi_r == 0.0) return {0.0, 0.0};
  // L(-chi) is the elementwise conjugate of L(chi), so the branch satisfies
  // lambda0(-chi) = conj(lambda0(chi)); walk the positive side only.
  const double target = std::abs(chi_r);
  BranchState st = initial_branch_state(p);
  walk_branch(p, 0.0, target, st, opt);
  return chi_r >= 0.0 ? st.lambda : std::conj(st.lambda);
}

std::vector<complex> dominant_eigenvalue_scan(const ModelParams& p,
                                              std::span<const double> chis,
                                              const EigenvalueOptions& opt) {
  p.validate();
  for (std::size_t i = 0; i < chis.size(); ++i) {
    if (chis[i] < 0.0 || chis[i] > kPi)
      throw std::invalid_argument("dominant_eigenvalue_scan: chi outside [0, pi]");
    if (i > 0 && chis[i] <= chis[i - 1])
      throw std::invalid_argument("dominant_eigenvalue_scan: grid not ascending");
  }
  std::vector<complex> out;
  out.reserve(chis.size());
  BranchState st = initial_branch_state(p);
  double pos = 0.0;
  for (double chi : chis) {
    if (chi == 0.0) {
      out.emplace_back(0.0, 0.0);
      continue;
    }
    walk_branch(p, pos, chi, st, opt);
    pos = chi;
    out.push_back(st.lambda);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stationary cumulants via the eigenvalue perturbation recursion
// ---------------------------------------------------------------------------

namespace {

// Solves L0 x = b on the trace-zero complement (sum of x forced to 0) for the
// untilted birth-death generator. Writing F_i for the i -> i+1 probability
// flux, L0 x = b fixes F_i = -(b_0 + ... + b_i); the fluxes then determine x
// by a forward recurrence whose homogeneous factor up/down = n/(1+n) < 1 is
// contracting, so no pivoting is needed. The remaining free multiple of the
// stationary state is removed by projection.
std::vector<double> solve_trace_orthogonal(const RateBands& bands,
                                           std::span<const double> stationary,
                                           std::span<const double> b) {
  const int dim = bands.N + 1;
  std::vector<double> prefix(dim);
  double sum = 0.0, comp = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double t = sum + b[i];
    if (std::abs(sum) >= std::abs(b[i]))
      comp += (sum - t) + b[i];
    else
      comp += (b[i] - t) + sum;
    sum = t;
    prefix[i] = sum + comp;
  }
  std::vector<double> x(dim, 0.0);
  for (int i = 0; i + 1 < dim; ++i) {
    const double d = bands.down_total[i + 1];
    if (!(d > 0.0))
      throw std::runtime_error(
          "stationary_cumulants: singular restricted generator (vanishing "
          "down rate)");
    x[i + 1] = (bands.up_total[i] * x[i] + prefix[i]) / d;
  }
  const double excess = kernels::compensated_sum(x);
  for (int i = 0; i < dim; ++i) x[i] -= excess * stationary[i];
  return x;
}

}  // namespace

CumulantSet stationary_cumulants(const ModelParams& p, int order) {
  p.validate();
  if (order < 1 || order > 6)
    throw std::invalid_argument("stationary_cumulants: order must be in 1..6");
  const RateBands bands = build_rate_bands(p);
  const StationaryState stat = stationary_state(p);
  const int dim = p.N + 1;

  // <1| G_plus |v> and <1| G_minus |v> are plain weighted sums because each
  // counted band has exactly one entry per column.
  auto bracket_plus = [&](std::span<const double> v) {
    return kernels::compensated_dot(bands.down_drain, v);
  };
  auto bracket_minus = [&](std::span<const double> v) {
    return kernels::compensated_dot(bands.up_drain, v);
  };

  std::vector<std::vector<double>> rho;  // expansion vectors rho_0..rho_{n-1}
  rho.push_back(stat.populations);
  std::vector<double> lambda(order + 1, 0.0);

  for (int n = 1; n <= order; ++n) {
    double lam = 0.0;
    for (int j = 1; j <= n; ++j) {
      const auto& v = rho[n - j];
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      lam += (bracket_plus(v) + sign * bracket_minus(v)) / factorial(j);
    }
    lambda[n] = lam;
    if (n == order) break;

    std::vector<double> b(dim, 0.0);
    for (int j = 1; j <= n; ++j) {
      const auto& v = rho[n - j];
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      const double inv_fact = 1.0 / factorial(j);
      for (int i = 0; i < dim; ++i) {
        double gv = 0.0;  // (V_j v)[i]
        if (i + 1 < dim) gv += bands.down_drain[i + 1] * v[i + 1];
        if (i > 0) gv += sign * bands.up_drain[i - 1] * v[i - 1];
        b[i] += lambda[j] * v[i] - inv_fact * gv;
      }
    }
    rho.push_back(solve_trace_orthogonal(bands, stat.populations, b));
  }

  CumulantSet out;
  out.order = order;
  out.method = CumulantMethod::eigenvalue_recursion;
  out.values.resize(order);
  for (int k = 1; k <= order; ++k) out.values[k - 1] = factorial(k) * lambda[k];
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference cross-check
// ---------------------------------------------------------------------------

namespace {

// 5-point central derivative of the eigenvalue branch at chi = 0, given the
// values at h and 2h; f(0) = 0 and f(-chi) = conj(f(chi)).
complex central_derivative(int k, double h, complex f1, complex f2) {
  const complex fm1 = std::conj(f1), fm2 = std::conj(f2);
  switch (k) {
    case 1: return (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h);
    case 2: return (-f2 + 16.0 * f1 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    case 3: return (f2 - 2.0 * f1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
    default: return (f2 - 4.0 * f1 - 4.0 * fm1 + fm2) / (h * h * h * h);
  }
}

// Richardson step: the derivative's error expands in even powers of h with
// leading exponent p.
complex richardson(complex coarse, complex fine, int p) {
  const double w = std::pow(2.0, p);
  return (w * fine - coarse) / (w - 1.0);
}

}  // namespace

CumulantSet cross_check_cumulants(const ModelParams& p, int order,
                                  const FiniteDifferenceOptions& opt) {
  p.validate();
  if (order < 1 || order > 4)
    throw std::invalid_argument("cross_check_cumulants: order must be in 1..4");

  CumulantSet out;
  out.order = order;
  out.method = CumulantMethod::finite_difference;
  out.values.assign(order, 0.0);

  // Stencil weight magnitudes, for the rounding-noise estimate.
  static constexpr double kWeight[5] = {0.0, 1.5, 17.0 / 6.0, 3.0, 10.0};

  if (opt.step > 0.0) {
    // Fixed step: one Richardson level on the user-provided h.
    std::vector<double> points = {0.5 * opt.step, opt.step, 2.0 * opt.step};
    const std::vector<complex> vals =
        dominant_eigenvalue_scan(p, points, opt.eigen);
    double max_abs = 0.0;
    for (const complex& v : vals) max_abs = std::max(max_abs, std::abs(v));
    for (int k = 1; k <= order; ++k) {
      const int p1 = k <= 2 ? 4 : 2;
      const complex coarse = central_derivative(k, opt.step, vals[1], vals[2]);
      const complex fine =
          central_derivative(k, 0.5 * opt.step, vals[0], vals[1]);
      const complex cum = std::pow(-kI, k) * richardson(coarse, fine, p1);
      out.values[k - 1] = cum.real();
      const double err_est =
          std::abs(richardson(coarse, fine, p1) - fine) / (std::pow(2.0, p1 + 2) - 1.0) +
          kWeight[k] * 8.0 * std::numeric_limits<double>::epsilon() * max_abs /
              std::pow(0.5 * opt.step, k) +
          std::abs(cum.imag());
      const double scale =
          std::max(std::abs(cum.real()), 1e-6 * std::max(1.0, max_abs));
      if (err_est > opt.tolerance * scale)
        out.warnings.push_back(
            "order " + std::to_string(k) +
            ": estimated finite-difference error exceeds tolerance");
    }
    return out;
  }

  // Automatic step selection. No single step works across parameter regimes:
  // rounding noise in the eigenvalues is amplified like h^-k while the
  // truncation error grows with h on a scale set by the branch's distance to
  // the nearest eigenvalue collision, which varies with N and the
  // occupations. Evaluate the twice-extrapolated estimator on a geometric
  // step ladder and, per order, pick the plateau where three consecutive
  // steps agree best.
  std::vector<double> ladder;
  for (double h = 0.004; h <= 0.75; h *= 1.3) ladder.push_back(h);
  std::vector<double> points;
  for (double h : ladder)
    for (double c : {0.25 * h, 0.5 * h, h, 2.0 * h}) points.push_back(c);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  // Walk the branch outward point by point; if tracking becomes ambiguous
  // (an eigenvalue collision at large chi), keep the reachable prefix and
  // drop the ladder steps that need points beyond it.
  std::vector<complex> vals;
  vals.reserve(points.size());
  {
    BranchState st = initial_branch_state(p);
    double pos = 0.0;
    for (double pt : points) {
      try {
        walk_branch(p, pos, pt, st, opt.eigen);
      } catch (const std::runtime_error&) {
        break;
      }
      pos = pt;
      vals.push_back(st.lambda);
    }
  }
  points.resize(vals.size());
  while (!ladder.empty() &&
         (points.empty() || 2.0 * ladder.back() > points.back()))
    ladder.pop_back();
  if (ladder.size() < 3)
    throw std::runtime_error(
        "cross_check_cumulants: eigenvalue branch not trackable far enough "
        "from chi = 0");

  auto value_at = [&](double chi) {
    const auto it = std::lower_bound(points.begin(), points.end(), chi);
    return vals[static_cast<std::size_t>(it - points.begin())];
  };
  double max_abs = 0.0;
  for (const complex& v : vals) max_abs = std::max(max_abs, std::abs(v));

  const int n_steps = static_cast<int>(ladder.size());
  for (int k = 1; k <= order; ++k) {
    const int p1 = k <= 2 ? 4 : 2;
    std::vector<complex> candidate(n_steps);
    for (int j = 0; j < n_steps; ++j) {
      const double h = ladder[j];
      const complex d_h = central_derivative(k, h, value_at(h), value_at(2.0 * h));
      const complex d_h2 =
          central_derivative(k, 0.5 * h, value_at(0.5 * h), value_at(h));
      const complex d_h4 =
          central_derivative(k, 0.25 * h, value_at(0.25 * h), value_at(0.5 * h));
      const complex r1 = richardson(d_h, d_h2, p1);
      const complex r2 = richardson(d_h2, d_h4, p1);
      candidate[j] = richardson(r1, r2, p1 + 2);
    }
    // (-i d/dchi)^k at chi = 0; the result is real for real parameters.
    std::vector<double> rotated(n_steps);
    for (int j = 0; j < n_steps; ++j)
      rotated[j] = (std::pow(-kI, k) * candidate[j]).real();
    int pick = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 2 < n_steps; ++j) {
      const double spread = std::max(std::abs(rotated[j] - rotated[j + 1]),
                                     std::abs(rotated[j + 1] - rotated[j + 2]));
      if (spread < best) {
        best = spread;
        pick = j + 1;
      }
    }
    std::array<double, 3> triple = {rotated[pick - 1], rotated[pick],
                                    rotated[pick + 1]};
    std::sort(triple.begin(), triple.end());
    const complex cum(triple[1],
                      (std::pow(-kI, k) * candidate[pick]).imag());
    out.values[k - 1] = cum.real();
    // Branch values are rounded to double, so the stencil sees noise of at
    // most a few ulps of the values it actually touches.
    double local_abs = 0.0;
    for (double c : {0.25, 0.5, 1.0, 2.0})
      local_abs = std::max(local_abs, std::abs(value_at(c * ladder[pick])));
    const double round_est = kWeight[k] * 8.0 *
                             std::numeric_limits<double>::epsilon() *
                             local_abs / std::pow(0.25 * ladder[pick], k);
    const double scale =
        std::max(std::abs(cum.real()), 1e-6 * std::max(1.0, max_abs));
    if (best + round_est + std::abs(cum.imag()) > opt.tolerance * scale)
      out.warnings.push_back(
          "order " + std::to_string(k) +
          ": estimated finite-difference error exceeds tolerance");
  }
  return out;
}

// ---------------------------------------------------------------------------
// N = 1 closed form
// ---------------------------------------------------------------------------

namespace {

struct N1Coefficients {
  double a, A, B, C;
};

N1Coefficients n1_coefficients(const ModelParams& p) {
  if (p.N != 1)
    throw std::invalid_argument("analytic N=1 form requires N == 1");
  const double gs = p.gamma_s, gd = p.gamma_d, ns = p.n_s, nd = p.n_d;
  N1Coefficients c;
  c.a = gs * (1.0 + 2.0 * ns) + gd * (1.0 + 2.0 * nd);
  c.A = (gs + gd) * (gs + gd) + 4.0 * gs * gs * ns * (1.0 + ns) +
        4.0 * gd * gd * nd * (1.0 + nd);
  c.B = 4.0 * gs * gd * ns * (1.0 + nd);
  c.C = 4.0 * gs * gd * nd * (1.0 + ns);
  return c;
}

}  // namespace

complex analytic_cgf_n1(const ModelParams& p, CountingField chi, double t) {
  p.validate();
  const N1Coefficients c = n1_coefficients(p);
  complex z = chi.value;
  if (chi.is_real()) z = reduce_principal(z.real());
  const complex radicand =
      c.A + c.B * std::exp(kI * z) + c.C * std::exp(-kI * z);
  complex root;
  if (radicand.imag() == 0.0 && radicand.real() < 0.0) {
    // On the branch cut (only reachable at chi = +-pi): the continuation from
    // chi = 0 approaches from the half-plane selected by sign(B - C) sin chi.
    const double mag = std::sqrt(-radicand.real());
    const double side = (c.B - c.C) * (z.real() >= 0.0 ? 1.0 : -1.0);
    root = complex(0.0, side >= 0.0 ? mag : -mag);
  } else {
    root = std::sqrt(radicand);
  }
  return t * 0.5 * (root - c.a);
}

CumulantSet analytic_cumulants_n1(const ModelParams& p, int order) {
  p.validate();
  if (order < 1 || order > 6)
    throw std::invalid_argument("analytic_cumulants_n1: order must be in 1..6");
  const N1Coefficients c = n1_coefficients(p);
  // Power series of the radicand in x = i*chi, then a square-root series.
  std::array<double, 7> r{}, s{};
  r[0] = c.A + c.B + c.C;
  for (int k = 1; k <= order; ++k)
    r[k] = (c.B + (k % 2 == 0 ? c.C : -c.C)) / factorial(k);
  s[0] = std::sqrt(r[0]);
  for (int n = 1; n <= order; ++n) {
    double acc = r[n];
    for (int k = 1; k < n; ++k) acc -= s[k] * s[n - k];
    s[n] = acc / (2.0 * s[0]);
  }
  CumulantSet out;
  out.order = order;
  out.method = CumulantMethod::analytic_n1;
  out.values.resize(order);
  for (int k = 1; k <= order; ++k)
    out.values[k - 1] = factorial(k) * 0.5 * s[k];
  return out;
}

// ---------------------------------------------------------------------------
// Transient propagation (Dormand-Prince embedded 4(5) pair)
// ---------------------------------------------------------------------------

namespace {

struct Rk45 {
  const TiltedGenerator& gen;
  std::array<std::vector<complex>, 7> k;
  std::vector<complex> scratch;

  explicit Rk45(const TiltedGenerator& g) : gen(g) {
    for (auto& s : k) s.resize(g.dim());
    scratch.resize(g.dim());
  }

  // One trial step from y over h; fills y_new and returns the error estimate
  // relative to rtol * max-norm scale. k[0] must hold L y on entry (FSAL).
  double step(const std::vector<complex>& y, double h,
              std::vector<complex>& y_new, double rtol) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                            a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0,
                            b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = b1 - 5179.0 / 57600.0,
                            e3 = b3 - 7571.0 / 16695.0, e4 = b4 - 393.0 / 640.0,
                            e5 = b5 + 92097.0 / 339200.0,
                            e6 = b6 - 187.0 / 2100.0, e7 = -1.0 / 40.0;
    const std::size_t n = y.size();
    auto stage = [&](std::vector<complex>& out,
                     std::initializer_list<std::pair<double, int>> terms) {
      for (std::size_t i = 0; i < n; ++i) {
        complex acc = y[i];
        for (const auto& [c, j] : terms) acc += h * c * k[j][i];
        out[i] = acc;
      }
    };
    stage(scratch, {{a21, 0}});
    matvec(gen, scratch, k[1]);
    stage(scratch, {{a31, 0}, {a32, 1}});
    matvec(gen, scratch, k[2]);
    stage(scratch, {{a41, 0}, {a42, 1}, {a43, 2}});
    matvec(gen, scratch, k[3]);
    stage(scratch, {{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}});
    matvec(gen, scratch, k[4]);
    stage(scratch, {{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}});
    matvec(gen, scratch, k[5]);
    stage(y_new, {{b1, 0}, {b3, 2}, {b4, 3}, {b5, 4}, {b6, 5}});
    matvec(gen, y_new, k[6]);

    double ynorm = 0.0, err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ynorm = std::max({ynorm, std::abs(y[i]), std::abs(y_new[i])});
      const complex e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] +
                             e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
      err = std::max(err, std::abs(e));
    }
    const double scale = rtol * std::max(ynorm, 1e-280);
    return err / scale;
  }
};

TransientCgf propagate_impl(const ModelParams& p, CountingField chi,
                            double t_final, std::vector<double> initial,
                            int num_samples, const OdeOptions& opt) {
  if (!(t_final > 0.0))
    throw std::invalid_argument("propagate_transient: t_final must be > 0");
  if (num_samples < 1)
    throw std::invalid_argument("propagate_transient: need >= 1 sample");
  if (!(opt.rtol > 0.0))
    throw std::invalid_argument("propagate_transient: rtol must be > 0");
  const TiltedGenerator gen = build_tilted_generator(p, chi);
  const std::size_t dim = static_cast<std::size_t>(gen.dim());
  if (initial.size() != dim)
    throw std::invalid_argument("propagate_transient: initial state size mismatch");
  double tr0 = 0.0;
  for (double v : initial) {
    if (v < -1e-12)
      throw std::invalid_argument("propagate_transient: negative initial population");
    tr0 += v;
  }
  if (std::abs(tr0 - 1.0) > 1e-6)
    throw std::invalid_argument("propagate_transient: initial state not normalized");

  std::vector<complex> y(dim);
  for (std::size_t i = 0; i < dim; ++i) y[i] = initial[i] / tr0;

  TransientCgf out;
  out.chi = chi.value;
  out.times.resize(num_samples);
  out.values.resize(num_samples);

  Rk45 rk(gen);
  matvec(gen, y, rk.k[0]);
  std::vector<complex> y_new(dim);

  const double scale0 = rate_scale(gen);
  double h = std::min(t_final / 10.0, 0.1 / std::max(scale0, 1e-12));
  double t = 0.0;
  // Running phase-unwrapped log of the trace, updated at every accepted step
  // so winding is tracked even between samples.
  complex log_tr{0.0, 0.0};
  long steps = 0;

  for (int s = 0; s < num_samples; ++s) {
    const double t_target = t_final * (s + 1) / num_samples;
    while (t < t_target) {
      h = std::min(h, t_target - t);
      if (h < 1e-14 * t_final)
        throw std::runtime_error("propagate_transient: step size underflow");
      const double err = rk.step(y, h, y_new, opt.rtol);
      if (++steps > opt.max_steps)
        throw std::runtime_error("propagate_transient: step limit exceeded");
      if (err <= 1.0) {
        t += h;
        y.swap(y_new);
        rk.k[0].swap(rk.k[6]);  // FSAL: L y_new was already computed
        const complex tr = compensated_trace(y);
        complex lg = std::log(tr);
        lg.imag(lg.imag() +
                2.0 * kPi *
                    std::round((log_tr.imag() - lg.imag()) / (2.0 * kPi)));
        log_tr = lg;
      }
      const double grow =
          err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
    }
    out.times[s] = t_target;
    out.values[s] = log_tr;
  }
  return out;
}

}  // namespace

TransientCgf propagate_transient(const ModelParams& p, CountingField chi,
                                 double t_final, int num_samples,
                                 const OdeOptions& opt) {
  p.validate();
  return propagate_impl(p, chi, t_final, stationary_state(p).populations,
                        num_samples, opt);
}

TransientCgf propagate_transient_from(const ModelParams& p, CountingField chi,
                                      double t_final,
                                      std::span<const double> initial,
                                      int num_samples, const OdeOptions& opt) {
  p.validate();
  return propagate_impl(p, chi, t_final,
                        std::vector<double>(initial.begin(), initial.end()),
                        num_samples, opt);
}

complex late_time_slope(const TransientCgf& transient) {
  const std::size_t n = transient.times.size();
  if (n < 2)
    throw std::invalid_argument("late_time_slope: need >= 2 samples");
  const std::size_t mid = n / 2;
  return (transient.values[n - 1] - transient.values[mid]) /
         (transient.times[n - 1] - transient.times[mid]);
}

// ---------------------------------------------------------------------------
// Counting distribution
// ---------------------------------------------------------------------------

double CountingDistribution::mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < probabilities.size(); ++j)
    m += (n_min + static_cast<double>(j)) * probabilities[j];
  return m;
}

double CountingDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    const double d = n_min + static_cast<double>(j) - m;
    v += d * d * probabilities[j];
  }
  return v;
}

CountingDistribution counting_distribution(const ModelParams& p, double t,
                                           int n_max,
                                           const DistributionOptions& opt) {
  p.validate();
  if (!(t > 0.0))
    throw std::invalid_argument("counting_distribution: t must be > 0");
  if (n_max < 1)
    throw std::invalid_argument("counting_distribution: n_max must be >= 1");

  const int K = 2 * n_max + 2;  // chi-grid size; conjugate symmetry halves it
  const int half = K / 2;
  const std::vector<double> rho0 = stationary_state(p).populations;
  std::vector<complex> m_vals(half + 1);
  std::string failure;

#pragma omp parallel for schedule(dynamic) if (opt.exec == kernels::Exec::openmp)
  for (int k = 0; k <= half; ++k) {
    try {
      const double chi_k = 2.0 * kPi * k / K;
      const TransientCgf tc =
          propagate_impl(p, CountingField(chi_k), t, rho0, 1, opt.ode);
      m_vals[k] = std::exp(tc.values.back());
    } catch (const std::exception& e) {
#pragma omp critical
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty())
    throw std::runtime_error("counting_distribution: " + failure);

  // Inverse DFT; n runs over one complete residue system, [-n_max, n_max+1].
  std::vector<double> full(K);
  double total = 0.0;
  for (int idx = 0; idx < K; ++idx) {
    const int n = idx - n_max;
    double acc = m_vals[0].real() +
                 (n % 2 == 0 ? 1.0 : -1.0) * m_vals[half].real();
    for (int k = 1; k < half; ++k) {
      const double ang = -2.0 * kPi * k * n / K;
      const complex w(std::cos(ang), std::sin(ang));
      acc += 2.0 * (w * m_vals[k]).real();
    }
    full[idx] = acc / K;
    total += full[idx];
  }

  if (std::abs(total - 1.0) > opt.norm_tol)
    throw std::runtime_error(
        "counting_distribution: total probability drifted beyond tolerance");
  const double tail = std::max({std::abs(full.front()),
                                std::abs(full[K - 2]), std::abs(full.back())});
  if (tail > opt.tail_tol)
    throw std::runtime_error(
        "counting_distribution: aliasing detected at the index boundary; "
        "increase n_max");
  for (double v : full)
    if (v < -opt.negativity_tol)
      throw std::runtime_error(
          "counting_distribution: probability below negativity tolerance");

  CountingDistribution dist;
  dist.n_min = -n_max;
  dist.probabilities.assign(full.begin(), full.end() - 1);
  return dist;
}

}  // namespace dicke::fcs
