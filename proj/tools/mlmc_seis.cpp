// mlmc-seis: multilevel Monte Carlo estimation of seismic misfit functionals.
//
//   mlmc-seis synth    CONFIG        synthetic observations
//   mlmc-seis verify   CONFIG        per-level samples and rate calibration
//   mlmc-seis plan     CONFIG        optimal hierarchies for the tolerance schedule
//   mlmc-seis run      CONFIG        executes the plans and the accuracy study
//   mlmc-seis report   CONFIG        CSV tables and SVG plots
//   mlmc-seis attencmp CONFIG        elastic vs attenuating misfit comparison
//
// Exit codes: 0 ok, 2 configuration error, 3 infeasible tolerance, 4 solver failure.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "mlmc_seis/error.hpp"
#include "mlmc_seis/study.hpp"

namespace {

using namespace mlmcseis;

struct Common {
  std::string config;
  std::string qoi;
};

RunConfig load(const Common& c) {
  auto cfg = load_config(c.config);
  if (!c.qoi.empty()) {
    if (cfg.is_surrogate()) throw ConfigError("--qoi does not apply to the surrogate model");
    cfg.qoi = parse_qoi_kind(c.qoi);
  }
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"Multilevel Monte Carlo for seismic misfit functionals"};
  app.require_subcommand(1);
  Common common;
  std::vector<int> levels;

  auto add = [&](const std::string& name, const std::string& help, bool qoi) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", common.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    if (qoi) sub->add_option("--qoi", common.qoi, "override the configured QoI (E or W)");
    return sub;
  };
  auto* synth = add("synth", "generate the synthetic data set", false);
  auto* verify = add("verify", "sample every level and calibrate the rate models", true);
  auto* plan = add("plan", "print the optimal hierarchies for the tolerance schedule", true);
  auto* run_cmd = add("run", "execute the plans for every tolerance", true);
  auto* report = add("report", "write tables and plots of the study", true);
  auto* atten = add("attencmp", "compare misfits with and without attenuation", false);
  atten->add_option("--levels", levels, "levels to compare (default: from the configuration)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  auto& log = std::cout;
  const auto cfg = load(common);
  if (synth->parsed()) cmd_synth(cfg, log);
  else if (verify->parsed()) cmd_verify(cfg, log);
  else if (plan->parsed()) cmd_plan(cfg, log);
  else if (run_cmd->parsed()) cmd_run(cfg, log);
  else if (report->parsed()) cmd_report(cfg, log);
  else if (atten->parsed()) {
    if (levels.empty()) levels = cfg.attencmp_levels;
    if (levels.empty()) throw ConfigError("attencmp: no levels given");
    cmd_attenuation_compare(cfg, levels, log);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mlmcseis::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return static_cast<int>(mlmcseis::ExitCode::kConfig);
  } catch (const mlmcseis::InfeasibleTolerance& e) {
    std::fprintf(stderr, "infeasible tolerance: %s (smallest achievable bias %.3e)\n", e.what(), e.smallest_bias());
    return static_cast<int>(mlmcseis::ExitCode::kInfeasible);
  } catch (const mlmcseis::SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return static_cast<int>(mlmcseis::ExitCode::kSolver);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
