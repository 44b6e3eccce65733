#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mlmc_seis/estimators.hpp"
#include "mlmc_seis/model.hpp"
#include "mlmc_seis/pool.hpp"
#include "mlmc_seis/sampling.hpp"

namespace mlmcseis {

// Per-level summary of a verification run (point estimates and bootstrap
// 95% intervals).
struct LevelDiagnostics {
  int level = 0;
  std::size_t samples = 0;
  double work = 0.0;  // mean fine-evaluation work, s
  double mean_q = 0.0;
  Interval mean_q_ci;
  double var_q = 0.0;
  Interval var_q_ci;
  // Coupled corrections (level >= 1).
  double mean_dq = 0.0;
  Interval mean_dq_ci;
  double var_dq = 0.0;
  Interval var_dq_ci;
};

struct RateModels {
  double gamma = 3.0;
  double q_w = 2.0;
  double q_s = 4.0;
  int l_ver = 0;
  std::vector<double> work;         // W_l, l = 0..l_ver
  std::vector<double> bias_anchor;  // Est95(dQ_l), l = 0..l_ver (entry 0 unused)
  std::vector<double> var_fine;     // V95(Q_l), l = 0..l_ver
  std::vector<double> var_corr;     // V95(dQ_l), l = 0..l_ver (entry 0 unused)
  // Diagnostics only: measured log2 ratios between consecutive levels.
  std::vector<double> measured_gamma;
  std::vector<double> measured_q_w;
  std::vector<double> measured_q_s;
  std::vector<LevelDiagnostics> diagnostics;
  std::string config_digest;
};

struct VerificationSpec {
  int l_ver = 3;
  std::vector<std::size_t> counts;  // per level 0..l_ver
  std::uint64_t run = 0;
  double gamma = 3.0;
  double q_w = 2.0;
  double q_s = 4.0;
  int resamples = 1000;
  std::uint64_t bootstrap_seed = 0;
  std::string config_digest;
};

// Samples level 0 fine-only and levels 1..l_ver coupled, then calibrates.
RateModels run_verification(const ForwardModel& model, const VerificationSpec& spec,
                            SamplePool& pool, const SamplingOptions& opts = {});

// Calibration from the first counts[l] samples of `spec.run` in the pool.
RateModels calibrate_from_pool(const SamplePool& pool, const VerificationSpec& spec);

// W_l for l <= l_ver, W_{l_ver} 2^(gamma (l - l_ver)) beyond.
double model_work(const RateModels& rm, int level);
// Est95(dQ_{l+1}) for l < l_ver, Est95(dQ_{l_ver}) 2^(-q_w (l - l_ver + 1)) beyond.
double model_bias(const RateModels& rm, int level);
// V95(Q_{l0}) at l = l0, V95(dQ_l) up to l_ver, V95(dQ_{l_ver}) 2^(-q_s (l - l_ver)) beyond.
double model_variance(const RateModels& rm, int level, int base_level);

std::string rate_models_to_json(const RateModels& rm);
RateModels rate_models_from_json(const std::string& text);
void save_rate_models(const RateModels& rm, const std::filesystem::path& path);
RateModels load_rate_models(const std::filesystem::path& path);

}  // namespace mlmcseis
