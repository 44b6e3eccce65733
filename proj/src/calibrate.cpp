#include "mlmc_seis/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

using nlohmann::json;

RateModels run_verification(const ForwardModel& model, const VerificationSpec& spec,
                            SamplePool& pool, const SamplingOptions& opts) {
  if (spec.counts.size() != static_cast<std::size_t>(spec.l_ver + 1))
    throw ConfigError("verification: need one sample count per level 0..l_ver");
  for (int l = 0; l <= spec.l_ver; ++l)
    run_samples(model, l, l == 0 ? SampleKind::kFineOnly : SampleKind::kCoupled, spec.run, 0,
                spec.counts[static_cast<std::size_t>(l)], pool, opts);
  return calibrate_from_pool(pool, spec);
}

RateModels calibrate_from_pool(const SamplePool& pool, const VerificationSpec& spec) {
  if (spec.l_ver < 1) throw ConfigError("verification: need at least levels 0 and 1");
  if (spec.counts.size() != static_cast<std::size_t>(spec.l_ver + 1))
    throw ConfigError("verification: need one sample count per level 0..l_ver");
  RateModels rm;
  rm.gamma = spec.gamma;
  rm.q_w = spec.q_w;
  rm.q_s = spec.q_s;
  rm.l_ver = spec.l_ver;
  rm.config_digest = spec.config_digest;
  const auto n_levels = static_cast<std::size_t>(spec.l_ver + 1);
  rm.work.assign(n_levels, 0.0);
  rm.bias_anchor.assign(n_levels, 0.0);
  rm.var_fine.assign(n_levels, 0.0);
  rm.var_corr.assign(n_levels, 0.0);

  for (int l = 0; l <= spec.l_ver; ++l) {
    const auto n = spec.counts[static_cast<std::size_t>(l)];
    if (n < 2) throw ConfigError("verification: need at least two samples per level");
    const auto samples = pool.at_level(l, spec.run);
    if (samples.size() < n)
      throw ConfigError("verification: pool lacks samples at level " + std::to_string(l));
    std::vector<double> fine, delta, work;
    for (std::size_t k = 0; k < n; ++k) {
      fine.push_back(samples[k]->fine);
      work.push_back(samples[k]->fine_work_s);
      if (l > 0) {
        if (!samples[k]->coarse) throw ConfigError("verification: level >= 1 samples must be coupled");
        delta.push_back(samples[k]->delta());
      }
    }
    // Distinct bootstrap streams per level and statistic.
    const auto seed = [&](int which) {
      return splitmix64(spec.bootstrap_seed ^ (static_cast<std::uint64_t>(l) * 4 + static_cast<std::uint64_t>(which)));
    };
    LevelDiagnostics d;
    d.level = l;
    d.samples = n;
    d.work = mc_mean(work);
    d.mean_q = mc_mean(fine);
    d.mean_q_ci = bootstrap_ci(fine, Statistic::kMean, spec.resamples, 0.95, seed(0));
    d.var_q = sample_variance(fine);
    d.var_q_ci = bootstrap_ci(fine, Statistic::kVariance, spec.resamples, 0.95, seed(1));
    if (l > 0) {
      d.mean_dq = mc_mean(delta);
      d.mean_dq_ci = bootstrap_ci(delta, Statistic::kMean, spec.resamples, 0.95, seed(2));
      d.var_dq = sample_variance(delta);
      d.var_dq_ci = bootstrap_ci(delta, Statistic::kVariance, spec.resamples, 0.95, seed(3));
    }
    const auto li = static_cast<std::size_t>(l);
    rm.work[li] = d.work;
    rm.var_fine[li] = d.var_q_ci.hi;
    if (l > 0) {
      rm.bias_anchor[li] = std::max(std::abs(d.mean_dq_ci.lo), std::abs(d.mean_dq_ci.hi));
      rm.var_corr[li] = d.var_dq_ci.hi;
    }
    rm.diagnostics.push_back(d);
  }
  for (int l = 1; l <= spec.l_ver; ++l) {
    const auto& a = rm.diagnostics[static_cast<std::size_t>(l - 1)];
    const auto& b = rm.diagnostics[static_cast<std::size_t>(l)];
    rm.measured_gamma.push_back(std::log2(b.work / a.work));
    if (l >= 2) {
      rm.measured_q_w.push_back(-std::log2(std::abs(b.mean_dq) / std::abs(a.mean_dq)));
      rm.measured_q_s.push_back(-std::log2(b.var_dq / a.var_dq));
    }
  }
  return rm;
}

double model_work(const RateModels& rm, int level) {
  if (level <= rm.l_ver) return rm.work.at(static_cast<std::size_t>(level));
  return rm.work.at(static_cast<std::size_t>(rm.l_ver)) * std::exp2(rm.gamma * (level - rm.l_ver));
}

double model_bias(const RateModels& rm, int level) {
  if (level < rm.l_ver) return rm.bias_anchor.at(static_cast<std::size_t>(level + 1));
  return rm.bias_anchor.at(static_cast<std::size_t>(rm.l_ver)) *
         std::exp2(-rm.q_w * (level - rm.l_ver + 1));
}

double model_variance(const RateModels& rm, int level, int base_level) {
  if (level < base_level) throw ConfigError("model_variance: level below base level");
  if (level == base_level)
    return rm.var_fine.at(static_cast<std::size_t>(std::min(base_level, rm.l_ver)));
  if (level <= rm.l_ver) return rm.var_corr.at(static_cast<std::size_t>(level));
  return rm.var_corr.at(static_cast<std::size_t>(rm.l_ver)) * std::exp2(-rm.q_s * (level - rm.l_ver));
}

namespace {

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }
Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::string rate_models_to_json(const RateModels& rm) {
  json j;
  j["gamma"] = rm.gamma;
  j["q_w"] = rm.q_w;
  j["q_s"] = rm.q_s;
  j["l_ver"] = rm.l_ver;
  j["work"] = rm.work;
  j["bias_anchor"] = rm.bias_anchor;
  j["var_fine"] = rm.var_fine;
  j["var_corr"] = rm.var_corr;
  j["measured_gamma"] = rm.measured_gamma;
  j["measured_q_w"] = rm.measured_q_w;
  j["measured_q_s"] = rm.measured_q_s;
  j["config_digest"] = rm.config_digest;
  json diag = json::array();
  for (const auto& d : rm.diagnostics) {
    diag.push_back({{"level", d.level},
                    {"samples", d.samples},
                    {"work", d.work},
                    {"mean_q", d.mean_q},
                    {"mean_q_ci", interval_json(d.mean_q_ci)},
                    {"var_q", d.var_q},
                    {"var_q_ci", interval_json(d.var_q_ci)},
                    {"mean_dq", d.mean_dq},
                    {"mean_dq_ci", interval_json(d.mean_dq_ci)},
                    {"var_dq", d.var_dq},
                    {"var_dq_ci", interval_json(d.var_dq_ci)}});
  }
  j["diagnostics"] = diag;
  return j.dump(2);
}

RateModels rate_models_from_json(const std::string& text) {
  RateModels rm;
  try {
    const auto j = json::parse(text);
    rm.gamma = j.at("gamma").get<double>();
    rm.q_w = j.at("q_w").get<double>();
    rm.q_s = j.at("q_s").get<double>();
    rm.l_ver = j.at("l_ver").get<int>();
    rm.work = j.at("work").get<std::vector<double>>();
    rm.bias_anchor = j.at("bias_anchor").get<std::vector<double>>();
    rm.var_fine = j.at("var_fine").get<std::vector<double>>();
    rm.var_corr = j.at("var_corr").get<std::vector<double>>();
    rm.measured_gamma = j.value("measured_gamma", std::vector<double>{});
    rm.measured_q_w = j.value("measured_q_w", std::vector<double>{});
    rm.measured_q_s = j.value("measured_q_s", std::vector<double>{});
    rm.config_digest = j.value("config_digest", std::string());
    for (const auto& d : j.value("diagnostics", json::array())) {
      LevelDiagnostics x;
      x.level = d.at("level").get<int>();
      x.samples = d.at("samples").get<std::size_t>();
      x.work = d.at("work").get<double>();
      x.mean_q = d.at("mean_q").get<double>();
      x.mean_q_ci = interval_from(d.at("mean_q_ci"));
      x.var_q = d.at("var_q").get<double>();
      x.var_q_ci = interval_from(d.at("var_q_ci"));
      x.mean_dq = d.at("mean_dq").get<double>();
      x.mean_dq_ci = interval_from(d.at("mean_dq_ci"));
      x.var_dq = d.at("var_dq").get<double>();
      x.var_dq_ci = interval_from(d.at("var_dq_ci"));
      rm.diagnostics.push_back(x);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration file: ") + e.what());
  }
  const auto n = static_cast<std::size_t>(rm.l_ver + 1);
  if (rm.work.size() != n || rm.bias_anchor.size() != n || rm.var_fine.size() != n || rm.var_corr.size() != n)
    throw ConfigError("calibration file: anchor arrays must cover levels 0..l_ver");
  return rm;
}

void save_rate_models(const RateModels& rm, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << rate_models_to_json(rm) << '\n';
}

RateModels load_rate_models(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing calibration file " + path.string() + " (run `verify` first)");
  std::stringstream ss;
  ss << in.rdbuf();
  return rate_models_from_json(ss.str());
}

}  // namespace mlmcseis
