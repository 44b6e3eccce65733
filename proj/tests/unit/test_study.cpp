#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "mlmc_seis/config.hpp"
#include "mlmc_seis/error.hpp"
#include "mlmc_seis/estimators.hpp"
#include "mlmc_seis/pool.hpp"
#include "mlmc_seis/study.hpp"

namespace {

using namespace mlmcseis;
using nlohmann::json;
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mlmc_seis_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json surrogate_json() {
  return json::parse(R"({
    "model": "surrogate",
    "seed": 99,
    "workers": 1,
    "output_dir": "out",
    "c_alpha": 2.0,
    "rates": {"gamma": 3.0, "q_w": 2.0, "q_s": 4.0},
    "hierarchy": {"l_max": 8},
    "verification": {"counts": [200, 200, 200, 200], "bootstrap_resamples": 200},
    "study": {"tolerances": {"tol1": 0.2, "count": 3}, "run_mc": true, "mc_work_limit_s": 1.0e9,
              "bootstrap_replicates": 100},
    "surrogate": {"dimension": 4, "q_w": 2.0, "q_s": 4.0, "gamma": 3.0, "c_b": 1.0, "w0": 1.0e-3}
  })");
}

json desk_json() {
  return json::parse(slurp(fs::path(MLMC_SEIS_SOURCE_DIR) / "configs" / "desk.json"));
}

RunConfig parse(const json& j, const fs::path& dir) { return parse_config(j.dump(), dir); }

fs::path write_config(const json& j, const fs::path& dir) {
  const auto path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

// Scoped MLMC_SEIS_WORKERS assignment.
class WorkersEnv {
 public:
  explicit WorkersEnv(const char* value) {
    if (const char* old = std::getenv("MLMC_SEIS_WORKERS")) saved_ = old;
    if (value) ::setenv("MLMC_SEIS_WORKERS", value, 1);
    else ::unsetenv("MLMC_SEIS_WORKERS");
  }
  ~WorkersEnv() {
    if (saved_) ::setenv("MLMC_SEIS_WORKERS", saved_->c_str(), 1);
    else ::unsetenv("MLMC_SEIS_WORKERS");
  }

 private:
  std::optional<std::string> saved_;
};

TEST(Config, SurrogateConfigParses) {
  const auto dir = fresh_dir("parse");
  const auto cfg = parse(surrogate_json(), dir);
  EXPECT_TRUE(cfg.is_surrogate());
  EXPECT_EQ(cfg.l_max(), 8);
  EXPECT_EQ(cfg.l_ver(), 3);
  ASSERT_EQ(cfg.study.tolerances.size(), 3u);
  EXPECT_DOUBLE_EQ(cfg.study.tolerances[0], 0.2);
  EXPECT_NEAR(cfg.study.tolerances[1], 0.2 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(cfg.output_dir, dir / "out");
}

TEST(Config, ShippedPresetsValidate) {
  for (const char* name : {"desk.json", "surrogate.json", "paper.json"}) {
    SCOPED_TRACE(name);
    EXPECT_NO_THROW(load_config(fs::path(MLMC_SEIS_SOURCE_DIR) / "configs" / name));
  }
}

TEST(Config, DigestTracksSampleRelevantFieldsOnly) {
  const auto dir = fresh_dir("digest");
  const auto base = parse(surrogate_json(), dir);
  auto j = surrogate_json();
  j["study"]["tolerances"]["tol1"] = 0.1;
  j["workers"] = 4;
  EXPECT_EQ(parse(j, dir).digest, base.digest);
  j["seed"] = 100;
  EXPECT_NE(parse(j, dir).digest, base.digest);
  auto k = surrogate_json();
  k["surrogate"]["c_b"] = 2.0;
  EXPECT_NE(parse(k, dir).digest, base.digest);
}

TEST(Config, InvalidConfigurationsAreRejected) {
  const auto dir = fresh_dir("invalid");
  auto expect_config_error = [&](json j, const char* what) {
    SCOPED_TRACE(what);
    EXPECT_THROW(parse(j, dir), ConfigError);
  };
  {
    auto j = surrogate_json();
    j["model"] = "spectral";
    expect_config_error(j, "unknown model");
  }
  {
    auto j = surrogate_json();
    j["study"]["tolerances"] = json::array({0.1, -0.05});
    expect_config_error(j, "negative tolerance");
  }
  {
    auto j = surrogate_json();
    j["verification"]["counts"] = json::array({100});
    expect_config_error(j, "single verification level");
  }
  {
    auto j = surrogate_json();
    j["c_alpha"] = 0.0;
    expect_config_error(j, "c_alpha");
  }
  {
    auto j = desk_json();
    j["data"]["rate"] = 15.0;
    expect_config_error(j, "observation interval not a multiple of dt0");
  }
  {
    auto j = desk_json();
    j["geometry"]["pad_x"] = 5000.0;
    j["geometry"]["pad_z"] = 5000.0;
    expect_config_error(j, "padding below the required padding");
  }
  {
    auto j = desk_json();
    j["hierarchy"]["c_cfl"] = 5.0;
    j["hierarchy"]["dt0"] = 0.4;
    expect_config_error(j, "unstable time step");
  }
  {
    auto j = desk_json();
    j["source"]["moment"] = json::array({json::array({1.0, 2.0}), json::array({3.0, 1.0})});
    expect_config_error(j, "asymmetric moment");
  }
  {
    auto j = desk_json();
    j["data"]["material"]["vs"] = json::array({3000.0});
    expect_config_error(j, "material layer count");
  }
  EXPECT_THROW(parse_config("{ not json", dir), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Config, WorkerCountEnvironmentOverride) {
  {
    WorkersEnv env(nullptr);
    EXPECT_EQ(resolve_workers(3), 3);
    EXPECT_EQ(resolve_workers(0), 1);
  }
  {
    WorkersEnv env("5");
    EXPECT_EQ(resolve_workers(2), 5);
  }
  {
    WorkersEnv env("0");
    EXPECT_THROW(resolve_workers(2), ConfigError);
  }
  {
    WorkersEnv env("four");
    EXPECT_THROW(resolve_workers(2), ConfigError);
  }
}

TEST(Study, EmptyReportIsValid) {
  const auto dir = fresh_dir("empty_report");
  const auto cfg = parse(surrogate_json(), dir);
  std::ostringstream log;
  cmd_report(cfg, log);
  const auto rdir = report_dir(cfg);
  for (const char* f : {"work_vs_tol.csv", "error_vs_tol.csv", "savings.csv", "plans.csv"}) {
    SCOPED_TRACE(f);
    const auto text = slurp(rdir / f);
    ASSERT_FALSE(text.empty());
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1) << "header only";
  }
  for (const char* f : {"work_vs_tol.svg", "error_vs_tol.svg", "statistical_error.svg"}) {
    SCOPED_TRACE(f);
    const auto text = slurp(rdir / f);
    EXPECT_NE(text.find("<svg"), std::string::npos);
    EXPECT_NE(text.find("</svg>"), std::string::npos);
  }
}

TEST(Study, RunBeforeVerifyIsAConfigError) {
  const auto dir = fresh_dir("no_calibration");
  const auto cfg = parse(surrogate_json(), dir);
  std::ostringstream log;
  EXPECT_THROW(cmd_run(cfg, log), ConfigError);
}

// One surrogate study shared by the end-to-end checks below.
class SurrogateStudy : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fresh_dir("surrogate_study");
    cfg_ = parse(surrogate_json(), dir_);
    std::ostringstream log;
    const auto t0 = std::chrono::steady_clock::now();
    cmd_verify(*cfg_, log);
    verify_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report_ = cmd_run(*cfg_, log);
    cmd_report(*cfg_, log);
  }
  static void TearDownTestSuite() { cfg_.reset(); }

  static inline fs::path dir_;
  static inline std::optional<RunConfig> cfg_;
  static inline StudyReport report_;
  static inline double verify_seconds_ = 0.0;
};

TEST_F(SurrogateStudy, VerificationIsFastAndCalibrationMatchesTheDigest) {
  EXPECT_LT(verify_seconds_, 10.0);
  const auto rm = load_rate_models(calibration_path(*cfg_));
  EXPECT_EQ(rm.config_digest, cfg_->digest);
}

TEST_F(SurrogateStudy, EveryToleranceHasAnExecutedPlan) {
  ASSERT_EQ(report_.tolerances.size(), 3u);
  for (const auto& r : report_.tolerances) {
    EXPECT_TRUE(r.feasible);
    EXPECT_GT(r.mlmc_measured_work, 0.0);
    ASSERT_TRUE(r.mc.has_value());
    EXPECT_TRUE(r.mc_executed);
    EXPECT_EQ(r.bootstrap_errors.size(), 100u);
  }
  // Independent seed namespaces per tolerance and per method.
  EXPECT_NE(report_.tolerances[0].mlmc_run, report_.tolerances[1].mlmc_run);
  EXPECT_NE(report_.tolerances[0].mlmc_run, report_.tolerances[0].mc_run);
}

TEST_F(SurrogateStudy, EstimatesAreReproducibleFromThePool) {
  SamplePool pool = SamplePool::open(run_pool_path(*cfg_), {cfg_->qoi_tag(), cfg_->model, cfg_->digest});
  const auto stored = study_from_json(slurp(study_path(*cfg_)));
  ASSERT_EQ(stored.tolerances.size(), report_.tolerances.size());
  for (const auto& r : stored.tolerances) {
    EXPECT_EQ(mlmc_estimate(pool, r.mlmc, r.mlmc_run), r.mlmc_estimate);
    EXPECT_EQ(mlmc_estimator_variance(pool, r.mlmc, r.mlmc_run), r.mlmc_variance);
    if (r.mc_executed) {
      EXPECT_EQ(mlmc_estimate(pool, *r.mc, r.mc_run), r.mc_estimate);
    }
  }
}

TEST_F(SurrogateStudy, SavingsAreOneMinusTheWorkRatio) {
  std::istringstream in(slurp(report_dir(*cfg_) / "savings.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "tol,savings,basis");
  std::size_t k = 0;
  while (std::getline(in, line)) {
    ASSERT_LT(k, report_.tolerances.size());
    const auto& r = report_.tolerances[k++];
    std::istringstream row(line);
    std::string tol, sav, basis;
    std::getline(row, tol, ',');
    std::getline(row, sav, ',');
    std::getline(row, basis, ',');
    EXPECT_EQ(basis, "measured");
    EXPECT_NEAR(std::stod(sav), 1.0 - r.mlmc_measured_work / r.mc_measured_work, 1e-9);
  }
  EXPECT_EQ(k, report_.tolerances.size());
}

TEST_F(SurrogateStudy, ReportRegenerationIsByteIdentical) {
  const auto rdir = report_dir(*cfg_);
  std::map<std::string, std::string> before;
  for (const auto& e : fs::directory_iterator(rdir)) before[e.path().filename()] = slurp(e.path());
  ASSERT_GE(before.size(), 6u);
  std::ostringstream log;
  cmd_report(*cfg_, log);
  for (const auto& [name, text] : before) EXPECT_EQ(slurp(rdir / name), text) << name;
}

TEST_F(SurrogateStudy, RerunningResumesWithoutNewSamples) {
  const auto pool_before = slurp(run_pool_path(*cfg_));
  const auto verify_before = slurp(verify_pool_path(*cfg_));
  std::ostringstream log;
  cmd_verify(*cfg_, log);
  const auto again = cmd_run(*cfg_, log);
  EXPECT_EQ(slurp(run_pool_path(*cfg_)), pool_before);
  EXPECT_EQ(slurp(verify_pool_path(*cfg_)), verify_before);
  ASSERT_EQ(again.tolerances.size(), report_.tolerances.size());
  for (std::size_t k = 0; k < again.tolerances.size(); ++k)
    EXPECT_EQ(again.tolerances[k].mlmc_estimate, report_.tolerances[k].mlmc_estimate);
  EXPECT_EQ(again.reference, report_.reference);
}

TEST_F(SurrogateStudy, ReferenceValueIsCloseToTheExactMean) {
  // E[Q] = dimension / 3 for the surrogate.
  EXPECT_NEAR(report_.reference, 4.0 / 3.0, 0.05);
  const auto& tight = report_.tolerances.back();
  EXPECT_EQ(report_.reference_l0, tight.mlmc.l0);
  EXPECT_EQ(report_.reference_L, tight.mlmc.L);
}

TEST(Study, InfeasibleTolerancesAreSkipped) {
  const auto dir = fresh_dir("infeasible_skip");
  auto j = surrogate_json();
  j["hierarchy"]["l_max"] = 3;
  j["study"]["tolerances"] = json::array({0.2, 1e-6});
  const auto cfg = parse(j, dir);
  std::ostringstream log;
  cmd_verify(cfg, log);
  const auto report = cmd_run(cfg, log);
  ASSERT_EQ(report.tolerances.size(), 2u);
  EXPECT_TRUE(report.tolerances[0].feasible);
  EXPECT_FALSE(report.tolerances[1].feasible);
  EXPECT_NE(log.str().find("warning"), std::string::npos);
}

TEST(Study, AttenuationComparisonWithElasticLayersShowsNoChange) {
  const auto dir = fresh_dir("attencmp_elastic");
  auto j = desk_json();
  j["output_dir"] = (dir / "out").string();
  j["hierarchy"]["l_max"] = 0;
  j["data"]["level"] = 1;
  for (auto& layer : j["medium"]["layers"]) layer["q"] = 1e12;
  const auto cfg = parse(j, dir);
  std::ostringstream log;
  cmd_synth(cfg, log);
  const int levels[] = {0};
  const auto rows = cmd_attenuation_compare(cfg, levels, log);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    SCOPED_TRACE(r.qoi);
    EXPECT_GT(r.elastic, 0.0);
    EXPECT_NEAR(r.change_percent, 0.0, 1e-6);
  }
}

// ---- command-line front end -------------------------------------------------

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + std::string(MLMC_SEIS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, SuccessfulCommandExitsZero) {
  const auto dir = fresh_dir("cli_ok");
  const auto path = write_config(surrogate_json(), dir);
  EXPECT_EQ(run_cli("verify " + path.string()), 0);
  EXPECT_EQ(run_cli("plan " + path.string()), 0);
  EXPECT_EQ(run_cli("report " + path.string()), 0);
}

TEST(Cli, ConfigurationErrorsExitTwo) {
  const auto dir = fresh_dir("cli_config");
  auto j = surrogate_json();
  j["c_alpha"] = -1.0;
  const auto bad = write_config(j, dir);
  EXPECT_EQ(run_cli("verify " + bad.string()), 2);
  EXPECT_EQ(run_cli("verify " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("frobnicate " + bad.string()), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("verify " + bad.string() + " --qoi X"), 2);
}

TEST(Cli, WorkerEnvironmentVariableIsValidated) {
  const auto dir = fresh_dir("cli_env");
  const auto path = write_config(surrogate_json(), dir);
  EXPECT_EQ(run_cli("verify " + path.string()), 0);
  EXPECT_EQ(run_cli("verify " + path.string(), "MLMC_SEIS_WORKERS=2 "), 0);
  EXPECT_EQ(run_cli("verify " + path.string(), "MLMC_SEIS_WORKERS=0 "), 2);
}

TEST(Cli, InfeasibleScheduleExitsThree) {
  const auto dir = fresh_dir("cli_infeasible");
  auto j = surrogate_json();
  j["hierarchy"]["l_max"] = 3;
  j["study"]["tolerances"] = json::array({1e-6});
  const auto path = write_config(j, dir);
  ASSERT_EQ(run_cli("verify " + path.string()), 0);
  EXPECT_EQ(run_cli("plan " + path.string()), 3);
}

TEST(Cli, UnrealizableAttenuationExitsFour) {
  const auto dir = fresh_dir("cli_solver");
  auto j = desk_json();
  j["output_dir"] = (dir / "out").string();
  j["solver"]["sls_mechanisms"] = 1;
  j["medium"]["layers"][0]["q"] = 5.0;
  const auto path = write_config(j, dir);
  EXPECT_EQ(run_cli("synth " + path.string()), 4);
}

}  // namespace
