// model.cpp — parameter validation and elementary rate functions.
#include "dicke/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dicke {

void ModelParams::validate() const {
  if (N < 1) throw std::invalid_argument("ModelParams: N must be >= 1");
  if (!(gamma_s >= 0.0) || !(gamma_d >= 0.0))
    throw std::invalid_argument("ModelParams: coupling rates must be >= 0");
  if (!(gamma_s + gamma_d > 0.0))
    throw std::invalid_argument("ModelParams: gamma_s + gamma_d must be > 0");
  if (!(n_s >= 0.0) || !(n_d >= 0.0))
    throw std::invalid_argument("ModelParams: occupations must be >= 0");
  if (!(omega > 0.0))
    throw std::invalid_argument("ModelParams: omega must be > 0");
}

EffectiveBath effective_bath(const ModelParams& p) {
  p.validate();
  const double gamma = p.gamma_s + p.gamma_d;
  const double n_bar = (p.gamma_s * p.n_s + p.gamma_d * p.n_d) / gamma;
  return {n_bar, gamma, n_bar / (1.0 + n_bar)};
}

double thermal_occupation(double beta, double omega) {
  const double x = beta * omega;
  if (!(x > 0.0))
    throw std::invalid_argument("thermal_occupation: beta*omega must be > 0");
  return 1.0 / std::expm1(x);
}

complex counting_kernel(CountingField chi, double gamma_d) {
  const complex i_chi = complex(0.0, 1.0) * chi.value;
  return 0.5 * gamma_d * (std::exp(i_chi) - 1.0);
}

}  // namespace dicke
