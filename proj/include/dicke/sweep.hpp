// sweep.hpp — parameter sweeps over the cumulant solvers and closed-form
// closures, emitted as CSV tables, plus canned figure-reproduction outputs
// (CSV + gnuplot script) with deterministic contents.
#pragma once

#include <string>
#include <vector>

#include "dicke/csv.hpp"
#include "dicke/kernels.hpp"
#include "dicke/model.hpp"

namespace dicke::sweep {

// Parameter being swept; every other parameter is taken from `base`.
enum class Axis { N, n_s, n_d, gamma_s, gamma_d };

// Cumulant back-ends. `me` is the master-equation solver (eigenvalue
// recursion); the closures give every odd order the same rate and every even
// order the same rate; `n1_analytic` is the N = 1 closed form.
enum class Method { me, approx1, approx2, approx3, n1_analytic };

std::string to_string(Axis axis);
std::string to_string(Method method);
Axis axis_from_string(const std::string& name);       // throws on unknown name
Method method_from_string(const std::string& name);   // throws on unknown name

// Cumulant rates 1..order for one parameter point and one back-end; the
// closure methods fill odd and even orders with their two shared rates.
std::vector<double> cumulant_rates(const ModelParams& p, Method method,
                                   int order);

struct SweepSpec {
  Axis axis = Axis::n_s;
  std::vector<double> grid;            // nonempty, strictly monotone;
                                       // Axis::N: positive integer values
  ModelParams base;                    // fixed parameters (axis overwritten)
  std::vector<Method> methods;         // nonempty
  int order = 2;                       // cumulant orders 1..order (1..6)
  int me_cap = 512;                    // largest N the me method accepts
  kernels::Exec exec = kernels::Exec::openmp;

  // Throws std::invalid_argument on any violated constraint above, including
  // an me method combined with an N beyond me_cap.
  void validate() const;
};

// One row per (grid point x method), in grid-major order with methods in the
// order given: N, gamma_s, gamma_d, n_s, n_d, method, k1..k<order>,
// wall_time_s, error. Rows whose evaluation throws keep their place with the
// message in the error column and empty cumulant cells; the sweep never
// aborts. Evaluation may run in parallel; assembly restores deterministic
// order so the values are independent of the schedule.
csv::Table run_sweep(const SweepSpec& spec);

// Canned reproduction outputs. `which` selects the dataset:
//  - "fig2": ratio of closure to master-equation first cumulant versus N
//    (log-spaced 1..500) for n_s in {0.1, 1, 10}, n_d = 0; columns
//    n_s, N, ratio_approx1, ratio_approx2, ratio_approx3.
//  - "fig3": second-cumulant rate versus n_s (log grid 0.01..1000) for
//    N in {5, 10, 20, 40, 80}, n_d = 0; columns N, n_s, k2_me, k2_approx1,
//    k2_approx2, k2_approx3.
// Writes <which>.csv and <which>.gp into out_dir and returns the paths.
// Repeated runs produce byte-identical files.
std::vector<std::string> reproduce_figure(const std::string& which,
                                          const std::string& out_dir);

}  // namespace dicke::sweep
