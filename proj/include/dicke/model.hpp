// model.hpp — parameter set and elementary rate functions for N two-level
// systems coupled symmetrically to two bosonic reservoirs (source / drain).
#pragma once

#include <complex>

namespace dicke {

using complex = std::complex<double>;

// Physical parameters. Transitions into/out of the drain reservoir carry the
// counting field; the level splitting omega never enters any rate or moment
// below (it only generates a phase in coherences, which decouple from the
// populations), so it is recorded for completeness but cancels everywhere.
struct ModelParams {
  int N = 1;             // number of two-level systems
  double gamma_s = 1.0;  // source coupling rate, >= 0
  double gamma_d = 1.0;  // drain coupling rate, >= 0 (gamma_s + gamma_d > 0)
  double n_s = 0.0;      // source thermal occupation, >= 0
  double n_d = 0.0;      // drain thermal occupation, >= 0
  double omega = 1.0;    // level splitting, > 0; cancels from all observables

  // Throws std::invalid_argument if any constraint above is violated.
  void validate() const;
};

// Single effective thermal bath equivalent to the two reservoirs.
struct EffectiveBath {
  double n_bar;        // (gamma_s n_s + gamma_d n_d) / (gamma_s + gamma_d)
  double gamma_total;  // gamma_s + gamma_d
  double ratio;        // n_bar / (1 + n_bar), in [0, 1)
};

// Counting field chi attached to drain transitions. Real chi is the usual
// case; a complex value supports complex-step evaluation. All observables
// built from it are 2*pi-periodic in real chi.
struct CountingField {
  complex value{0.0, 0.0};

  CountingField() = default;
  CountingField(double chi) : value(chi, 0.0) {}
  CountingField(complex chi) : value(chi) {}

  bool is_real() const { return value.imag() == 0.0; }
};

// Collapses the two reservoirs into one effective bath.
EffectiveBath effective_bath(const ModelParams& p);

// Bose-Einstein occupation 1 / (exp(beta*omega) - 1); requires beta*omega > 0.
double thermal_occupation(double beta, double omega);

// Drain counting kernel f[chi] = (gamma_d / 2) * (exp(i*chi) - 1).
// f[0] = 0 and f[-chi] = conj(f[chi]) for real chi.
complex counting_kernel(CountingField chi, double gamma_d);

}  // namespace dicke
