#include "mlmc_seis/surrogate.hpp"

#include <cmath>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

void SurrogateSpec::validate() const {
  if (dimension < 1) throw ConfigError("surrogate: dimension must be >= 1");
  if (!(q_w > 0.0 && q_s > 0.0 && gamma > 0.0)) throw ConfigError("surrogate: rates must be > 0");
  if (c_b == 0.0) throw ConfigError("surrogate: bias constant must be nonzero");
  if (!(w0 > 0.0)) throw ConfigError("surrogate: base work must be > 0");
}

SurrogateResult surrogate_eval(const SurrogateSpec& spec, std::span<const double> theta, int level) {
  if (theta.size() != static_cast<std::size_t>(spec.dimension))
    throw ConfigError("surrogate: theta has the wrong dimension");
  double g = 0.0;
  for (double t : theta) g += t * t;
  const double b = spec.c_b * (1.0 + theta[0]);
  return {g + b * std::exp2(-spec.q_w * level), spec.w0 * std::exp2(spec.gamma * level)};
}

std::vector<double> surrogate_theta(const SurrogateSpec& spec, const SampleKey& key) {
  KeyedStream rng(key);
  std::vector<double> theta(static_cast<std::size_t>(spec.dimension));
  for (double& t : theta) t = rng.uniform();
  return theta;
}

double surrogate_mean(const SurrogateSpec& spec) { return spec.dimension / 3.0; }

double surrogate_bias(const SurrogateSpec& spec, int level) {
  return 1.5 * spec.c_b * std::exp2(-spec.q_w * level);
}

double surrogate_variance(const SurrogateSpec& spec, int level) {
  // Var(t^2) = 4/45, Var(t) = 1/12, Cov(t^2, t) = 1/12 for t ~ U[0, 1].
  const double c = spec.c_b * std::exp2(-spec.q_w * level);
  return spec.dimension * 4.0 / 45.0 + c * c / 12.0 + 2.0 * c / 12.0;
}

double surrogate_correction_variance(const SurrogateSpec& spec, int level) {
  const double d = spec.c_b * (std::exp2(-spec.q_w * level) - std::exp2(-spec.q_w * (level - 1)));
  return d * d / 12.0;
}

}  // namespace mlmcseis
