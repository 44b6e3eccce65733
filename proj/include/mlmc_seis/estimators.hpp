#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlmc_seis/plan.hpp"
#include "mlmc_seis/pool.hpp"

namespace mlmcseis {

double mc_mean(std::span<const double> values);
// Unbiased sample variance, 1 / (N - 1) normalization.
double sample_variance(std::span<const double> values);

enum class Statistic { kMean, kVariance };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap interval of `stat` over `resamples` with-replacement
// resamples of the same size.  Deterministic given `seed`.
Interval bootstrap_ci(std::span<const double> values, Statistic stat, int resamples = 1000,
                      double coverage = 0.95, std::uint64_t seed = 0);

// Terms entering an MLMC estimator: fine values at the base level, coupled
// differences above it.  First `count` samples in (run, index) order.
std::vector<double> level_terms(const SamplePool& pool, int level, int base_level,
                                std::optional<std::uint64_t> run, std::size_t count);

// mean(Q_{l0}) + sum_{l > l0} mean(dQ_l), each over the first N_l samples.
double mlmc_estimate(const SamplePool& pool, const Plan& plan,
                     std::optional<std::uint64_t> run = std::nullopt);
// sum_l sample_variance(level-l terms) / N_l.
double mlmc_estimator_variance(const SamplePool& pool, const Plan& plan,
                               std::optional<std::uint64_t> run = std::nullopt);

// Estimator over all samples of all runs on levels l0..L (reference values).
struct PooledEstimate {
  double value = 0.0;
  double variance = 0.0;
  std::vector<std::size_t> counts;  // per level l0..L
};
PooledEstimate pooled_estimate(const SamplePool& pool, int l0, int l_top);

}  // namespace mlmcseis
