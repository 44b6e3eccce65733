#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlmc_seis/calibrate.hpp"
#include "mlmc_seis/config.hpp"
#include "mlmc_seis/data.hpp"
#include "mlmc_seis/model.hpp"
#include "mlmc_seis/plan.hpp"

namespace mlmcseis {

struct ToleranceResult {
  int k = 0;  // 1-based position in the schedule
  double tol = 0.0;
  bool feasible = true;
  std::string note;
  Plan mlmc;
  std::uint64_t mlmc_run = 0;
  double mlmc_estimate = 0.0;
  double mlmc_variance = 0.0;
  double mlmc_measured_work = 0.0;
  std::optional<Plan> mc;
  bool mc_executed = false;
  std::uint64_t mc_run = 0;
  double mc_estimate = 0.0;
  double mc_variance = 0.0;
  double mc_measured_work = 0.0;
  // |bootstrap replicate of the MLMC estimator - reference|.
  std::vector<double> bootstrap_errors;
};

struct StudyReport {
  std::string qoi;
  std::string config_digest;
  double c_alpha = 2.0;
  double reference = 0.0;
  double reference_variance = 0.0;
  int reference_l0 = 0;
  int reference_L = 0;
  std::vector<std::size_t> reference_counts;
  std::vector<ToleranceResult> tolerances;
};

struct AttenuationRow {
  std::string qoi;
  int level = 0;
  double elastic = 0.0;
  double attenuated = 0.0;
  double change_percent = 0.0;
};

// Forward model selected by the configuration (loads the data set for the solver).
std::unique_ptr<ForwardModel> make_model(const RunConfig& cfg);
std::shared_ptr<const DataSet> load_data(const RunConfig& cfg);
WaveSetup wave_setup(const RunConfig& cfg);

std::filesystem::path data_path(const RunConfig& cfg);
std::filesystem::path verify_pool_path(const RunConfig& cfg);
std::filesystem::path calibration_path(const RunConfig& cfg);
std::filesystem::path run_pool_path(const RunConfig& cfg);
std::filesystem::path study_path(const RunConfig& cfg);
std::filesystem::path report_dir(const RunConfig& cfg);

VerificationSpec verification_spec(const RunConfig& cfg);

DataSet cmd_synth(const RunConfig& cfg, std::ostream& log);
RateModels cmd_verify(const RunConfig& cfg, std::ostream& log);
// Plans (MLMC, MC) per tolerance; infeasible entries are empty.
std::vector<std::pair<std::optional<Plan>, std::optional<Plan>>> cmd_plan(const RunConfig& cfg,
                                                                          std::ostream& log);
StudyReport cmd_run(const RunConfig& cfg, std::ostream& log);
void cmd_report(const RunConfig& cfg, std::ostream& log);
std::vector<AttenuationRow> cmd_attenuation_compare(const RunConfig& cfg, std::span<const int> levels,
                                                    std::ostream& log);

// Plain-text plan table: one row per tolerance, N_l per level.
std::string format_plan_table(const std::vector<Plan>& plans, int l_max);

std::string plan_to_json(const Plan& p);
Plan plan_from_json(const std::string& text);
std::string study_to_json(const StudyReport& r);
StudyReport study_from_json(const std::string& text);

}  // namespace mlmcseis
