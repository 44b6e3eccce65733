#include "mlmc_seis/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

double mc_mean(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mc_mean: empty input");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw ConfigError("sample_variance: need at least two values");
  const double m = mc_mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return acc / static_cast<double>(values.size() - 1);
}

namespace {

double statistic(std::span<const double> v, Statistic s) {
  return s == Statistic::kMean ? mc_mean(v) : sample_variance(v);
}

// Linear-interpolated empirical quantile of sorted data.
double quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= sorted.size()) return sorted.back();
  return sorted[k] + (pos - static_cast<double>(k)) * (sorted[k + 1] - sorted[k]);
}

}  // namespace

Interval bootstrap_ci(std::span<const double> values, Statistic stat, int resamples, double coverage,
                      std::uint64_t seed) {
  if (values.size() < 2) throw ConfigError("bootstrap_ci: need at least two values");
  if (resamples < 100) throw ConfigError("bootstrap_ci: need at least 100 resamples");
  if (!(coverage > 0.0 && coverage < 1.0)) throw ConfigError("bootstrap_ci: coverage must be in (0, 1)");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("bootstrap_ci: non-finite value");
  const std::size_t n = values.size();
  KeyedStream rng(seed);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  std::vector<double> buf(n);
  for (auto& s : stats) {
    for (auto& b : buf) b = values[static_cast<std::size_t>(rng() % n)];
    s = statistic(buf, stat);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - coverage);
  Interval ci{quantile(stats, tail), quantile(stats, 1.0 - tail)};
  // Constant data: keep the interval exactly degenerate.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }))
    ci = {statistic(values, stat), statistic(values, stat)};
  return ci;
}

std::vector<double> level_terms(const SamplePool& pool, int level, int base_level,
                                std::optional<std::uint64_t> run, std::size_t count) {
  std::vector<double> out;
  for (const auto* s : pool.at_level(level, run)) {
    if (out.size() == count) break;
    if (level == base_level) {
      out.push_back(s->fine);
    } else if (s->coarse) {
      out.push_back(s->delta());
    }
  }
  if (out.size() < count)
    throw ConfigError("pool has " + std::to_string(out.size()) + " usable samples at level " +
                      std::to_string(level) + ", plan needs " + std::to_string(count));
  return out;
}

double mlmc_estimate(const SamplePool& pool, const Plan& plan, std::optional<std::uint64_t> run) {
  double acc = 0.0;
  for (int l = plan.l0; l <= plan.L; ++l) {
    const auto terms = level_terms(pool, l, plan.l0, run, plan.count(l));
    acc += mc_mean(terms);
  }
  return acc;
}

double mlmc_estimator_variance(const SamplePool& pool, const Plan& plan,
                               std::optional<std::uint64_t> run) {
  double acc = 0.0;
  for (int l = plan.l0; l <= plan.L; ++l) {
    const auto terms = level_terms(pool, l, plan.l0, run, plan.count(l));
    acc += sample_variance(terms) / static_cast<double>(terms.size());
  }
  return acc;
}

PooledEstimate pooled_estimate(const SamplePool& pool, int l0, int l_top) {
  PooledEstimate est;
  for (int l = l0; l <= l_top; ++l) {
    std::vector<double> terms;
    for (const auto* s : pool.at_level(l)) {
      if (l == l0) terms.push_back(s->fine);
      else if (s->coarse) terms.push_back(s->delta());
    }
    if (terms.size() < 2)
      throw ConfigError("pooled estimate: fewer than two samples at level " + std::to_string(l));
    est.value += mc_mean(terms);
    est.variance += sample_variance(terms) / static_cast<double>(terms.size());
    est.counts.push_back(terms.size());
  }
  return est;
}

}  // namespace mlmcseis
