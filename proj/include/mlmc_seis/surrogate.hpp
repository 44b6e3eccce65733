#pragma once

#include <span>
#include <vector>

#include "mlmc_seis/rng.hpp"

namespace mlmcseis {

// Cheap test model with closed-form mean, bias, variance and work:
//   Q_l(theta) = sum_i theta_i^2 + C_b (1 + theta_1) 2^(-q_w l),
//   work_l     = W_0 2^(gamma l),
// theta ~ Uniform[0, 1]^m.  Corrections decay with strong exponent 2 q_w.
struct SurrogateSpec {
  int dimension = 4;
  double q_w = 2.0;
  double q_s = 4.0;
  double gamma = 3.0;
  double c_b = 1.0;
  double w0 = 1e-3;  // s

  void validate() const;
};

struct SurrogateResult {
  double value = 0.0;
  double work = 0.0;  // simulated seconds
};

SurrogateResult surrogate_eval(const SurrogateSpec& spec, std::span<const double> theta, int level);

// The random input of one sample key.
std::vector<double> surrogate_theta(const SurrogateSpec& spec, const SampleKey& key);

// E[Q] of the limit model, m / 3.
double surrogate_mean(const SurrogateSpec& spec);
// E[Q_l] - E[Q] = 1.5 C_b 2^(-q_w l).
double surrogate_bias(const SurrogateSpec& spec, int level);
// Var[Q_l].
double surrogate_variance(const SurrogateSpec& spec, int level);
// Var[Q_l - Q_{l-1}] for l >= 1.
double surrogate_correction_variance(const SurrogateSpec& spec, int level);

}  // namespace mlmcseis
