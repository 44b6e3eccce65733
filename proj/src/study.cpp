#include "mlmc_seis/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "mlmc_seis/error.hpp"
#include "mlmc_seis/estimators.hpp"
#include "mlmc_seis/qoi.hpp"
#include "mlmc_seis/report.hpp"
#include "mlmc_seis/sampling.hpp"

namespace mlmcseis {

using nlohmann::json;

std::filesystem::path data_path(const RunConfig& cfg) { return cfg.out(cfg.data.file); }
std::filesystem::path verify_pool_path(const RunConfig& cfg) { return cfg.out("verify_" + cfg.qoi_tag() + ".jsonl"); }
std::filesystem::path calibration_path(const RunConfig& cfg) { return cfg.out("calibration_" + cfg.qoi_tag() + ".json"); }
std::filesystem::path run_pool_path(const RunConfig& cfg) { return cfg.out("runs_" + cfg.qoi_tag() + ".jsonl"); }
std::filesystem::path study_path(const RunConfig& cfg) { return cfg.out("study_" + cfg.qoi_tag() + ".json"); }
std::filesystem::path report_dir(const RunConfig& cfg) { return cfg.out("report_" + cfg.qoi_tag()); }

WaveSetup wave_setup(const RunConfig& cfg) {
  return {cfg.medium, cfg.uncertainty, cfg.source, cfg.geometry, cfg.solver};
}

std::shared_ptr<const DataSet> load_data(const RunConfig& cfg) {
  auto data = std::make_shared<DataSet>(read_dataset(data_path(cfg)));
  if (data->traces.size() != cfg.geometry.receivers())
    throw ConfigError("data file does not match the configured receivers (rerun `synth`)");
  return data;
}

std::unique_ptr<ForwardModel> make_model(const RunConfig& cfg) {
  if (cfg.is_surrogate()) return std::make_unique<SurrogateModel>(cfg.surrogate);
  return std::make_unique<WaveModel>(wave_setup(cfg), load_data(cfg), cfg.qoi);
}

VerificationSpec verification_spec(const RunConfig& cfg) {
  VerificationSpec spec;
  spec.l_ver = cfg.l_ver();
  spec.counts = cfg.verification_counts;
  spec.run = run_id(cfg.seed, "verify");
  spec.gamma = cfg.gamma;
  spec.q_w = cfg.q_w;
  spec.q_s = cfg.q_s;
  spec.resamples = cfg.bootstrap_resamples;
  spec.bootstrap_seed = run_id(cfg.seed, "verify/bootstrap");
  spec.config_digest = cfg.digest;
  return spec;
}

namespace {

PoolProvenance provenance(const RunConfig& cfg) {
  return {cfg.qoi_tag(), cfg.model, cfg.digest};
}

SamplingOptions sampling_options(const RunConfig& cfg) { return {resolve_workers(cfg.workers), false}; }

std::string sci(double x, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

}  // namespace

DataSet cmd_synth(const RunConfig& cfg, std::ostream& log) {
  if (cfg.is_surrogate()) throw ConfigError("synth: the surrogate model uses no data");
  SynthRequest req;
  req.source = cfg.source;
  req.material = cfg.data.material;
  req.geometry = cfg.geometry;
  req.options = cfg.solver;
  req.fine_level = cfg.data.level;
  req.hierarchy_max = cfg.l_max();
  req.rate = cfg.data.rate;
  req.sigma = cfg.data.sigma_relative ? 0.0 : cfg.data.sigma;
  req.seed = cfg.data.seed;
  log << "synth: solving level " << req.fine_level << " (h=" << Level::make(cfg.solver.hierarchy, req.fine_level).h
      << " m)\n";
  DataSet data = generate_synthetic(req, cfg.medium);
  if (cfg.data.sigma_relative) {
    double peak = 0.0;
    for (const auto& tr : data.traces)
      for (int c = 0; c < 2; ++c)
        for (double v : tr.component(c)) peak = std::max(peak, std::abs(v));
    add_noise(data, *cfg.data.sigma_relative * peak, cfg.data.seed);
    data.metadata["sigma_relative"] = num(*cfg.data.sigma_relative);
  }
  data.metadata["config_digest"] = cfg.digest;
  write_dataset(data, data_path(cfg));
  log << "synth: wrote " << data_path(cfg).string() << " (" << data.traces.size() << " receivers, "
      << data.grid().count << " samples at " << data.rate << " Hz, sigma=" << sci(data.sigma) << " m)\n";
  return data;
}

RateModels cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const auto model = make_model(cfg);
  auto pool = SamplePool::open(verify_pool_path(cfg), provenance(cfg));
  const auto spec = verification_spec(cfg);
  const auto opts = sampling_options(cfg);
  for (int l = 0; l <= spec.l_ver; ++l) {
    const auto n = spec.counts[static_cast<std::size_t>(l)];
    const auto added = run_samples(*model, l, l == 0 ? SampleKind::kFineOnly : SampleKind::kCoupled, spec.run, 0,
                                   n, pool, opts);
    log << "verify: level " << l << ": " << n << " samples (" << added << " new)\n";
  }
  const auto rm = calibrate_from_pool(pool, spec);
  save_rate_models(rm, calibration_path(cfg));

  CsvTable diag({"level", "samples", "work_s", "mean_q", "mean_q_lo", "mean_q_hi", "var_q", "var_q_lo", "var_q_hi",
                 "mean_dq", "mean_dq_lo", "mean_dq_hi", "var_dq", "var_dq_lo", "var_dq_hi"});
  log << "level      N     work[s]      E[Q]       V[Q]       E[dQ]      V[dQ]\n";
  for (const auto& d : rm.diagnostics) {
    diag.add_row({std::to_string(d.level), std::to_string(d.samples), num(d.work), num(d.mean_q),
                  num(d.mean_q_ci.lo), num(d.mean_q_ci.hi), num(d.var_q), num(d.var_q_ci.lo), num(d.var_q_ci.hi),
                  num(d.mean_dq), num(d.mean_dq_ci.lo), num(d.mean_dq_ci.hi), num(d.var_dq), num(d.var_dq_ci.lo),
                  num(d.var_dq_ci.hi)});
    char line[200];
    std::snprintf(line, sizeof line, "%5d %6zu %11.4e %10.3e %10.3e %10.3e %10.3e\n", d.level, d.samples, d.work,
                  d.mean_q, d.var_q, d.mean_dq, d.var_dq);
    log << line;
  }
  diag.write(cfg.out("verify_" + cfg.qoi_tag() + "_diagnostics.csv"));
  log << "verify: measured log2 work ratios:";
  for (double g : rm.measured_gamma) log << ' ' << sci(g, 2);
  log << "\nverify: wrote " << calibration_path(cfg).string() << '\n';
  return rm;
}

std::string format_plan_table(const std::vector<Plan>& plans, int l_max) {
  std::ostringstream o;
  char buf[64];
  o << "kind        TOL   l0   L";
  for (int l = 0; l <= l_max; ++l) {
    std::snprintf(buf, sizeof buf, " %9s", ("N_" + std::to_string(l)).c_str());
    o << buf;
  }
  o << "   theta   pred.work[s]\n";
  for (const auto& p : plans) {
    std::snprintf(buf, sizeof buf, "%-5s %10.3e %4d %3d", to_string(p.kind).c_str(), p.tol, p.l0, p.L);
    o << buf;
    for (int l = 0; l <= l_max; ++l) {
      if (l >= p.l0 && l <= p.L) std::snprintf(buf, sizeof buf, " %9lld", static_cast<long long>(p.count(l)));
      else std::snprintf(buf, sizeof buf, " %9s", "-");
      o << buf;
    }
    std::snprintf(buf, sizeof buf, " %7.4f %14.4e\n", p.theta, p.predicted_work);
    o << buf;
  }
  return o.str();
}

std::vector<std::pair<std::optional<Plan>, std::optional<Plan>>> cmd_plan(const RunConfig& cfg, std::ostream& log) {
  const auto rm = load_rate_models(calibration_path(cfg));
  if (rm.config_digest != cfg.digest) throw ConfigError("calibration was produced by a different configuration");
  std::vector<std::pair<std::optional<Plan>, std::optional<Plan>>> out;
  std::vector<Plan> shown;
  json arr = json::array();
  for (double tol : cfg.study.tolerances) {
    std::optional<Plan> ml, mc;
    try {
      ml = select_hierarchy(tol, cfg.c_alpha, cfg.l_max(), rm);
      shown.push_back(*ml);
      arr.push_back(json::parse(plan_to_json(*ml)));
    } catch (const InfeasibleTolerance& e) {
      log << "plan: MLMC " << e.what() << '\n';
    }
    try {
      mc = select_mc(tol, cfg.c_alpha, cfg.l_max(), rm);
      shown.push_back(*mc);
      arr.push_back(json::parse(plan_to_json(*mc)));
    } catch (const InfeasibleTolerance& e) {
      log << "plan: MC " << e.what() << '\n';
    }
    out.emplace_back(ml, mc);
  }
  write_text(cfg.out("plans_" + cfg.qoi_tag() + ".json"), arr.dump(2) + "\n");
  log << format_plan_table(shown, cfg.l_max());
  const bool any = std::any_of(out.begin(), out.end(), [](const auto& p) { return p.first.has_value(); });
  if (!out.empty() && !any) {
    double best = model_bias(rm, 0);
    for (int l = 1; l <= cfg.l_max(); ++l) best = std::min(best, model_bias(rm, l));
    throw InfeasibleTolerance("no tolerance in the schedule is feasible", best);
  }
  return out;
}

namespace {

// Executes a plan in the run namespace `run`: base level fine-only, the rest coupled.
void execute_plan(const ForwardModel& model, const Plan& plan, std::uint64_t run, SamplePool& pool,
                  const SamplingOptions& opts) {
  for (int l = plan.l0; l <= plan.L; ++l)
    run_samples(model, l, l == plan.l0 ? SampleKind::kFineOnly : SampleKind::kCoupled, run, 0, plan.count(l), pool,
                opts);
}

double measured_work(const SamplePool& pool, const Plan& plan, std::uint64_t run) {
  double w = 0.0;
  for (int l = plan.l0; l <= plan.L; ++l) {
    const auto samples = pool.at_level(l, run);
    for (std::size_t k = 0; k < plan.count(l); ++k) w += samples.at(k)->work_s;
  }
  return w;
}

// Union of the verification and run pools (distinct run namespaces).
SamplePool combined_pool(const RunConfig& cfg, const SamplePool& runs) {
  SamplePool all(runs.provenance());
  for (const auto& path : {verify_pool_path(cfg)}) {
    if (!std::filesystem::exists(path)) continue;
    const auto p = SamplePool::load(path);
    for (int l : p.levels())
      for (const auto* s : p.at_level(l)) all.append(*s);
  }
  for (int l : runs.levels())
    for (const auto* s : runs.at_level(l)) all.append(*s);
  return all;
}

std::vector<double> bootstrap_errors(const SamplePool& all, const Plan& plan, double reference, int replicates,
                                     std::uint64_t seed) {
  std::vector<std::vector<double>> terms;
  for (int l = plan.l0; l <= plan.L; ++l) {
    std::vector<double> t;
    for (const auto* s : all.at_level(l)) {
      if (l == plan.l0) t.push_back(s->fine);
      else if (s->coarse) t.push_back(s->delta());
    }
    if (t.empty()) return {};
    terms.push_back(std::move(t));
  }
  KeyedStream rng(seed);
  std::vector<double> errs;
  for (int r = 0; r < replicates; ++r) {
    double est = 0.0;
    for (int l = plan.l0; l <= plan.L; ++l) {
      const auto& t = terms[static_cast<std::size_t>(l - plan.l0)];
      const std::size_t n = plan.count(l);
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += t[static_cast<std::size_t>(rng() % t.size())];
      est += acc / static_cast<double>(n);
    }
    errs.push_back(std::abs(est - reference));
  }
  return errs;
}

}  // namespace

StudyReport cmd_run(const RunConfig& cfg, std::ostream& log) {
  const auto rm = load_rate_models(calibration_path(cfg));
  if (rm.config_digest != cfg.digest) throw ConfigError("calibration was produced by a different configuration");
  if (cfg.study.tolerances.empty()) throw ConfigError("run: the study has no tolerances");
  const auto model = make_model(cfg);
  auto pool = SamplePool::open(run_pool_path(cfg), provenance(cfg));
  const auto opts = sampling_options(cfg);

  StudyReport report;
  report.qoi = cfg.qoi_tag();
  report.config_digest = cfg.digest;
  report.c_alpha = cfg.c_alpha;
  for (std::size_t k = 0; k < cfg.study.tolerances.size(); ++k) {
    ToleranceResult res;
    res.k = static_cast<int>(k) + 1;
    res.tol = cfg.study.tolerances[k];
    try {
      res.mlmc = select_hierarchy(res.tol, cfg.c_alpha, cfg.l_max(), rm);
    } catch (const InfeasibleTolerance& e) {
      res.feasible = false;
      res.note = e.what();
      log << "run: warning: skipping TOL=" << sci(res.tol) << ": " << e.what() << '\n';
      report.tolerances.push_back(res);
      continue;
    }
    res.mlmc_run = run_id(cfg.seed, "tol" + std::to_string(res.k) + "/mlmc");
    execute_plan(*model, res.mlmc, res.mlmc_run, pool, opts);
    res.mlmc_estimate = mlmc_estimate(pool, res.mlmc, res.mlmc_run);
    res.mlmc_variance = mlmc_estimator_variance(pool, res.mlmc, res.mlmc_run);
    res.mlmc_measured_work = measured_work(pool, res.mlmc, res.mlmc_run);
    log << "run: TOL=" << sci(res.tol) << " MLMC l0=" << res.mlmc.l0 << " L=" << res.mlmc.L
        << " estimate=" << sci(res.mlmc_estimate, 5) << " work=" << sci(res.mlmc_measured_work) << " s (predicted "
        << sci(res.mlmc.predicted_work) << " s)\n";
    try {
      res.mc = select_mc(res.tol, cfg.c_alpha, cfg.l_max(), rm);
      res.mc_run = run_id(cfg.seed, "tol" + std::to_string(res.k) + "/mc");
      if (cfg.study.run_mc && res.mc->predicted_work <= cfg.study.mc_work_limit_s) {
        execute_plan(*model, *res.mc, res.mc_run, pool, opts);
        res.mc_executed = true;
        res.mc_estimate = mlmc_estimate(pool, *res.mc, res.mc_run);
        res.mc_variance = mlmc_estimator_variance(pool, *res.mc, res.mc_run);
        res.mc_measured_work = measured_work(pool, *res.mc, res.mc_run);
        log << "run: TOL=" << sci(res.tol) << " MC L=" << res.mc->L << " estimate=" << sci(res.mc_estimate, 5)
            << " work=" << sci(res.mc_measured_work) << " s\n";
      } else {
        log << "run: TOL=" << sci(res.tol) << " MC L=" << res.mc->L << " not executed (predicted work "
            << sci(res.mc->predicted_work) << " s)\n";
      }
    } catch (const InfeasibleTolerance& e) {
      res.mc.reset();
      log << "run: TOL=" << sci(res.tol) << " MC infeasible: " << e.what() << '\n';
    }
    report.tolerances.push_back(res);
  }

  // Reference value: every sample of the study pooled on the hierarchy of the
  // tightest feasible tolerance.
  const auto all = combined_pool(cfg, pool);
  const ToleranceResult* tightest = nullptr;
  for (const auto& r : report.tolerances)
    if (r.feasible) tightest = &r;
  if (tightest) {
    report.reference_l0 = tightest->mlmc.l0;
    report.reference_L = tightest->mlmc.L;
    const auto ref = pooled_estimate(all, report.reference_l0, report.reference_L);
    report.reference = ref.value;
    report.reference_variance = ref.variance;
    report.reference_counts = ref.counts;
    log << "run: reference value " << sci(ref.value, 5) << " (pooled levels " << report.reference_l0 << ".."
        << report.reference_L << ")\n";
    for (auto& r : report.tolerances)
      if (r.feasible)
        r.bootstrap_errors = bootstrap_errors(all, r.mlmc, report.reference, cfg.study.bootstrap_replicates,
                                              run_id(cfg.seed, "bootstrap/" + std::to_string(r.k)));
  }
  write_text(study_path(cfg), study_to_json(report) + "\n");
  log << "run: wrote " << study_path(cfg).string() << '\n';
  return report;
}

void cmd_report(const RunConfig& cfg, std::ostream& log) {
  StudyReport study;
  if (std::filesystem::exists(study_path(cfg))) {
    std::ifstream in(study_path(cfg));
    std::stringstream ss;
    ss << in.rdbuf();
    study = study_from_json(ss.str());
  } else {
    log << "report: no study results yet; writing empty tables\n";
  }
  const auto dir = report_dir(cfg);
  CsvTable work({"tol", "mlmc_measured_work_s", "mlmc_predicted_work_s", "mc_measured_work_s", "mc_predicted_work_s",
                 "savings"});
  CsvTable error({"tol", "estimate", "reference", "abs_error", "bootstrap_fraction_below_tol"});
  CsvTable boot({"tol", "replicate", "abs_error"});
  CsvTable stat({"tol", "theta", "theta_tol_over_c_alpha", "estimator_std"});
  CsvTable plans({"tol", "kind", "l0", "L", "samples", "theta", "predicted_work_s", "predicted_bias", "executed"});
  CsvTable savings({"tol", "savings", "basis"});
  PlotSeries w_ml{"MLMC measured", {}, {}, false, "#1f77b4"};
  PlotSeries w_mlp{"MLMC predicted", {}, {}, false, "#1f77b4", true};
  PlotSeries w_mc{"MC measured", {}, {}, false, "#d62728"};
  PlotSeries w_mcp{"MC predicted", {}, {}, false, "#d62728", true};
  PlotSeries e_est{"|estimate - ref|", {}, {}, true, "#1f77b4"};
  PlotSeries e_boot{"bootstrap", {}, {}, true, "#aec7e8"};
  PlotSeries e_tol{"TOL", {}, {}, false, "black", true};
  PlotSeries s_std{"sqrt(estimator variance)", {}, {}, true, "#1f77b4"};
  PlotSeries s_bound{"theta TOL / C_alpha", {}, {}, false, "black", true};

  auto samples_str = [](const Plan& p) {
    std::string s;
    for (std::size_t k = 0; k < p.samples.size(); ++k) s += (k ? " " : "") + std::to_string(p.samples[k]);
    return s;
  };
  for (const auto& r : study.tolerances) {
    if (!r.feasible) continue;
    const double mc_measured = r.mc_executed ? r.mc_measured_work : 0.0;
    const double mc_pred = r.mc ? r.mc->predicted_work : 0.0;
    const double mc_basis = r.mc_executed ? mc_measured : mc_pred;
    const double sav = mc_basis > 0.0 ? 1.0 - r.mlmc_measured_work / mc_basis : 0.0;
    work.add_row({num(r.tol), num(r.mlmc_measured_work), num(r.mlmc.predicted_work),
                  r.mc_executed ? num(mc_measured) : "", r.mc ? num(mc_pred) : "", r.mc ? num(sav) : ""});
    if (r.mc) savings.add_row({num(r.tol), num(sav), r.mc_executed ? "measured" : "predicted"});
    const double err = std::abs(r.mlmc_estimate - study.reference);
    std::size_t below = 0;
    for (double e : r.bootstrap_errors) below += e <= r.tol;
    error.add_row({num(r.tol), num(r.mlmc_estimate), num(study.reference), num(err),
                   r.bootstrap_errors.empty() ? "" : num(double(below) / double(r.bootstrap_errors.size()))});
    for (std::size_t k = 0; k < r.bootstrap_errors.size(); ++k) {
      boot.add_row({num(r.tol), std::to_string(k), num(r.bootstrap_errors[k])});
      e_boot.x.push_back(r.tol);
      e_boot.y.push_back(r.bootstrap_errors[k]);
    }
    const double bound = r.mlmc.theta * r.tol / study.c_alpha;
    stat.add_row({num(r.tol), num(r.mlmc.theta), num(bound), num(std::sqrt(r.mlmc_variance))});
    plans.add_row({num(r.tol), "MLMC", std::to_string(r.mlmc.l0), std::to_string(r.mlmc.L), samples_str(r.mlmc),
                   num(r.mlmc.theta), num(r.mlmc.predicted_work), num(r.mlmc.predicted_bias), "yes"});
    if (r.mc)
      plans.add_row({num(r.tol), "MC", std::to_string(r.mc->l0), std::to_string(r.mc->L), samples_str(*r.mc),
                     num(r.mc->theta), num(r.mc->predicted_work), num(r.mc->predicted_bias),
                     r.mc_executed ? "yes" : "no"});
    w_ml.x.push_back(r.tol), w_ml.y.push_back(r.mlmc_measured_work);
    w_mlp.x.push_back(r.tol), w_mlp.y.push_back(r.mlmc.predicted_work);
    if (r.mc_executed) w_mc.x.push_back(r.tol), w_mc.y.push_back(mc_measured);
    if (r.mc) w_mcp.x.push_back(r.tol), w_mcp.y.push_back(mc_pred);
    e_est.x.push_back(r.tol), e_est.y.push_back(err);
    e_tol.x.push_back(r.tol), e_tol.y.push_back(r.tol);
    s_std.x.push_back(r.tol), s_std.y.push_back(std::sqrt(r.mlmc_variance));
    s_bound.x.push_back(r.tol), s_bound.y.push_back(bound);
  }
  // Reference slopes TOL^-2 and TOL^-(2 + gamma / q_w), anchored at the loosest tolerance.
  std::vector<PlotSeries> work_series{w_ml, w_mlp, w_mc, w_mcp};
  if (!w_mlp.x.empty()) {
    PlotSeries s2{"slope -2", {}, {}, false, "#7f7f7f", true};
    PlotSeries s35{"slope -(2+gamma/q_w)", {}, {}, false, "#bcbd22", true};
    const double t0 = w_mlp.x.front(), a0 = w_mlp.y.front();
    const double b0 = w_mcp.y.empty() ? a0 : w_mcp.y.front();
    const double slope_mc = 2.0 + cfg.gamma / cfg.q_w;
    for (double t : w_mlp.x) {
      s2.x.push_back(t), s2.y.push_back(a0 * std::pow(t / t0, -2.0));
      s35.x.push_back(t), s35.y.push_back(b0 * std::pow(t / t0, -slope_mc));
    }
    work_series.push_back(s2);
    work_series.push_back(s35);
  }
  work.write(dir / "work_vs_tol.csv");
  error.write(dir / "error_vs_tol.csv");
  boot.write(dir / "bootstrap_errors.csv");
  stat.write(dir / "statistical_error.csv");
  plans.write(dir / "plans.csv");
  savings.write(dir / "savings.csv");
  write_text(dir / "work_vs_tol.svg", svg_loglog("Work vs tolerance", "TOL", "work [core s]", work_series));
  write_text(dir / "error_vs_tol.svg", svg_loglog("Error vs tolerance", "TOL", "error", {e_boot, e_est, e_tol}));
  write_text(dir / "statistical_error.svg",
             svg_loglog("Statistical error", "TOL", "standard deviation", {s_std, s_bound}));
  log << "report: wrote " << dir.string() << " (" << work.rows() << " tolerances)\n";
}

std::vector<AttenuationRow> cmd_attenuation_compare(const RunConfig& cfg, std::span<const int> levels,
                                                    std::ostream& log) {
  if (cfg.is_surrogate()) throw ConfigError("attencmp: needs the wave solver model");
  const auto data = load_data(cfg);
  const MaterialSample material = cfg.attencmp_material ? *cfg.attencmp_material : cfg.data.material;
  std::vector<AttenuationRow> rows;
  std::vector<AttenuationRow> w_rows;
  for (int level : levels) {
    double e[2], w[2];
    for (int att = 0; att < 2; ++att) {
      auto opts = cfg.solver;
      opts.attenuation = att == 1;
      const auto seis = simulate(material, cfg.medium, cfg.source, cfg.geometry,
                                 Level::make(cfg.solver.hierarchy, level), opts);
      e[att] = qoi_e(seis, *data);
      w[att] = qoi_w(seis, *data);
    }
    rows.push_back({"E", level, e[0], e[1], 100.0 * (e[1] - e[0]) / e[0]});
    w_rows.push_back({"W", level, w[0], w[1], 100.0 * (w[1] - w[0]) / w[0]});
  }
  rows.insert(rows.end(), w_rows.begin(), w_rows.end());
  CsvTable table({"qoi", "level", "elastic", "attenuated", "change_percent"});
  log << "QoI  level     elastic  attenuated   change\n";
  for (const auto& r : rows) {
    table.add_row({"Q_" + r.qoi, std::to_string(r.level), num(r.elastic), num(r.attenuated), num(r.change_percent)});
    char line[128];
    std::snprintf(line, sizeof line, "Q_%s  %5d  %10.3e  %10.3e  %+6.1f%%\n", r.qoi.c_str(), r.level, r.elastic,
                  r.attenuated, r.change_percent);
    log << line;
  }
  table.write(cfg.out("attencmp.csv"));
  return rows;
}

std::string plan_to_json(const Plan& p) {
  json j{{"kind", to_string(p.kind)},
         {"l0", p.l0},
         {"L", p.L},
         {"samples", p.samples},
         {"theta", p.theta},
         {"c_alpha", p.c_alpha},
         {"tol", p.tol},
         {"predicted_work", p.predicted_work},
         {"predicted_bias", p.predicted_bias},
         {"predicted_variance", p.predicted_variance}};
  return j.dump();
}

namespace {

Plan plan_from(const json& j) {
  Plan p;
  p.kind = j.at("kind").get<std::string>() == "MC" ? PlanKind::kMC : PlanKind::kMLMC;
  p.l0 = j.at("l0").get<int>();
  p.L = j.at("L").get<int>();
  p.samples = j.at("samples").get<std::vector<long long>>();
  p.theta = j.at("theta").get<double>();
  p.c_alpha = j.at("c_alpha").get<double>();
  p.tol = j.at("tol").get<double>();
  p.predicted_work = j.at("predicted_work").get<double>();
  p.predicted_bias = j.at("predicted_bias").get<double>();
  p.predicted_variance = j.at("predicted_variance").get<double>();
  return p;
}

}  // namespace

Plan plan_from_json(const std::string& text) { return plan_from(json::parse(text)); }

std::string study_to_json(const StudyReport& r) {
  json j;
  j["qoi"] = r.qoi;
  j["config_digest"] = r.config_digest;
  j["c_alpha"] = r.c_alpha;
  j["reference"] = {{"value", r.reference},
                    {"variance", r.reference_variance},
                    {"l0", r.reference_l0},
                    {"L", r.reference_L},
                    {"counts", r.reference_counts}};
  json tols = json::array();
  for (const auto& t : r.tolerances) {
    json x{{"k", t.k}, {"tol", t.tol}, {"feasible", t.feasible}, {"note", t.note}};
    if (t.feasible) {
      x["mlmc"] = {{"plan", json::parse(plan_to_json(t.mlmc))},
                   {"run", t.mlmc_run},
                   {"estimate", t.mlmc_estimate},
                   {"variance", t.mlmc_variance},
                   {"measured_work", t.mlmc_measured_work}};
      if (t.mc)
        x["mc"] = {{"plan", json::parse(plan_to_json(*t.mc))},
                   {"executed", t.mc_executed},
                   {"run", t.mc_run},
                   {"estimate", t.mc_estimate},
                   {"variance", t.mc_variance},
                   {"measured_work", t.mc_measured_work}};
      x["bootstrap_errors"] = t.bootstrap_errors;
    }
    tols.push_back(x);
  }
  j["tolerances"] = tols;
  return j.dump(2);
}

StudyReport study_from_json(const std::string& text) {
  StudyReport r;
  try {
    const auto j = json::parse(text);
    r.qoi = j.at("qoi").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.c_alpha = j.at("c_alpha").get<double>();
    const auto& ref = j.at("reference");
    r.reference = ref.at("value").get<double>();
    r.reference_variance = ref.at("variance").get<double>();
    r.reference_l0 = ref.at("l0").get<int>();
    r.reference_L = ref.at("L").get<int>();
    r.reference_counts = ref.at("counts").get<std::vector<std::size_t>>();
    for (const auto& x : j.at("tolerances")) {
      ToleranceResult t;
      t.k = x.at("k").get<int>();
      t.tol = x.at("tol").get<double>();
      t.feasible = x.at("feasible").get<bool>();
      t.note = x.value("note", std::string());
      if (t.feasible) {
        const auto& m = x.at("mlmc");
        t.mlmc = plan_from(m.at("plan"));
        t.mlmc_run = m.at("run").get<std::uint64_t>();
        t.mlmc_estimate = m.at("estimate").get<double>();
        t.mlmc_variance = m.at("variance").get<double>();
        t.mlmc_measured_work = m.at("measured_work").get<double>();
        if (x.contains("mc")) {
          const auto& c = x["mc"];
          t.mc = plan_from(c.at("plan"));
          t.mc_executed = c.at("executed").get<bool>();
          t.mc_run = c.at("run").get<std::uint64_t>();
          t.mc_estimate = c.at("estimate").get<double>();
          t.mc_variance = c.at("variance").get<double>();
          t.mc_measured_work = c.at("measured_work").get<double>();
        }
        t.bootstrap_errors = x.value("bootstrap_errors", std::vector<double>{});
      }
      r.tolerances.push_back(t);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("study file: ") + e.what());
  }
  return r;
}

}  // namespace mlmcseis
