#include "mlmc_seis/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mlmc_seis/error.hpp"
#include "mlmc_seis/plan.hpp"
#include "mlmc_seis/sls.hpp"

namespace mlmcseis {

using nlohmann::json;

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::qoi_tag() const { return is_surrogate() ? "S" : to_string(qoi); }

int resolve_workers(int configured) {
  if (const char* env = std::getenv("MLMC_SEIS_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("MLMC_SEIS_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1, configured);
}

namespace {

MaterialSample parse_material(const json& j) {
  MaterialSample m;
  m.rho = j.at("rho").get<std::vector<double>>();
  m.vs = j.at("vs").get<std::vector<double>>();
  m.vp = j.at("vp").get<std::vector<double>>();
  if (m.rho.size() != m.vs.size() || m.rho.size() != m.vp.size())
    throw ConfigError("material: rho, vs, vp must have the same length");
  return m;
}

LayeredMedium parse_medium(const json& j) {
  if (j.contains("preset")) {
    if (j["preset"] == "rift") return rift_medium();
    throw ConfigError("medium: unknown preset");
  }
  std::vector<LayerSpec> layers;
  for (const auto& l : j.at("layers")) {
    LayerSpec s;
    if (l.contains("thickness") && !l["thickness"].is_null()) s.thickness = l["thickness"].get<double>();
    s.rho_bar = l.at("rho").get<double>();
    s.vs_bar = l.at("vs").get<double>();
    s.vp_bar = l.at("vp").get<double>();
    s.q_factor = l.at("q").get<double>();
    layers.push_back(s);
  }
  return LayeredMedium(std::move(layers));
}

SourceSpec parse_source(const json& j) {
  SourceSpec s;
  s.x_s = j.at("x_s").get<double>();
  s.d_s = j.at("d_s").get<double>();
  const auto& m = j.at("moment");
  if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
    throw ConfigError("source: moment must be a 2x2 matrix");
  if (m[0][1].get<double>() != m[1][0].get<double>()) throw ConfigError("source: moment must be symmetric");
  s.moment = {m[0][0].get<double>(), m[1][1].get<double>(), m[0][1].get<double>()};
  s.f0 = j.at("f0").get<double>();
  s.t_c = j.value("t_c", 0.0);
  s.t0 = j.at("t0").get<double>();
  s.horizon = j.at("horizon").get<double>();
  return s;
}

std::vector<double> parse_tolerances(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return tolerance_schedule(j.at("tol1").get<double>(), j.at("count").get<int>());
}

bool is_multiple(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  try {
    const auto j = json::parse(text);
    cfg.model = j.value("model", std::string("solver"));
    if (cfg.model != "solver" && cfg.model != "surrogate")
      throw ConfigError("model must be 'solver' or 'surrogate'");
    cfg.qoi = parse_qoi_kind(j.value("qoi", std::string("E")));
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.workers = j.value("workers", 1);
    cfg.output_dir = base_dir / j.value("output_dir", std::string("out"));
    cfg.c_alpha = j.value("c_alpha", 2.0);

    if (j.contains("rates")) {
      const auto& r = j["rates"];
      cfg.gamma = r.value("gamma", 3.0);
      cfg.q_w = r.value("q_w", 2.0);
      cfg.q_s = r.value("q_s", 4.0);
    }
    const auto& h = j.at("hierarchy");
    cfg.solver.hierarchy.h0 = h.value("h0", 1000.0);
    cfg.solver.hierarchy.dt0 = h.value("dt0", 0.05);
    cfg.solver.hierarchy.l_max = h.at("l_max").get<int>();
    cfg.solver.hierarchy.c_cfl = h.value("c_cfl", 0.45);

    const auto& v = j.at("verification");
    cfg.verification_counts = v.at("counts").get<std::vector<std::size_t>>();
    cfg.bootstrap_resamples = v.value("bootstrap_resamples", 1000);

    if (j.contains("study")) {
      const auto& s = j["study"];
      if (s.contains("tolerances")) cfg.study.tolerances = parse_tolerances(s["tolerances"]);
      cfg.study.run_mc = s.value("run_mc", false);
      cfg.study.mc_work_limit_s = s.value("mc_work_limit_s", 0.0);
      cfg.study.bootstrap_replicates = s.value("bootstrap_replicates", 1000);
    }

    json digest_src;
    digest_src["model"] = cfg.model;
    digest_src["seed"] = cfg.seed;
    digest_src["h0"] = cfg.solver.hierarchy.h0;
    digest_src["dt0"] = cfg.solver.hierarchy.dt0;

    if (cfg.is_surrogate()) {
      const auto& s = j.at("surrogate");
      cfg.surrogate.dimension = s.value("dimension", 4);
      cfg.surrogate.q_w = s.value("q_w", 2.0);
      cfg.surrogate.q_s = s.value("q_s", 4.0);
      cfg.surrogate.gamma = s.value("gamma", 3.0);
      cfg.surrogate.c_b = s.value("c_b", 1.0);
      cfg.surrogate.w0 = s.value("w0", 1e-3);
      digest_src["surrogate"] = s;
    } else {
      cfg.medium = parse_medium(j.at("medium"));
      const auto& u = j.at("uncertainty");
      cfg.uncertainty = {u.at("q").get<double>(), u.at("r").get<double>(), u.at("nu_lb").get<double>(),
                         u.at("nu_ub").get<double>()};
      cfg.source = parse_source(j.at("source"));
      const auto& g = j.at("geometry");
      cfg.geometry.receiver_offsets = g.at("receiver_offsets").get<std::vector<double>>();
      cfg.geometry.receiver_depth = g.value("receiver_depth", 0.0);
      cfg.geometry.pad_x = g.at("pad_x").get<double>();
      cfg.geometry.pad_z = g.at("pad_z").get<double>();
      if (j.contains("solver")) {
        const auto& s = j["solver"];
        cfg.solver.sponge_width = s.value("sponge_width", 20.0 * cfg.solver.hierarchy.h0);
        cfg.solver.sponge_alpha = s.value("sponge_alpha", 5.0);
        cfg.solver.sls_mechanisms = s.value("sls_mechanisms", 3);
        cfg.solver.attenuation = s.value("attenuation", true);
      } else {
        cfg.solver.sponge_width = 20.0 * cfg.solver.hierarchy.h0;
      }
      const auto& d = j.at("data");
      cfg.data.level = d.at("level").get<int>();
      cfg.data.rate = d.at("rate").get<double>();
      cfg.data.sigma = d.value("sigma", 0.0);
      if (d.contains("sigma_relative")) cfg.data.sigma_relative = d["sigma_relative"].get<double>();
      cfg.data.seed = d.value("seed", std::uint64_t{1});
      cfg.data.material = d.contains("material") ? parse_material(d["material"]) : nominal_material(cfg.medium);
      cfg.data.file = d.value("file", std::string("data.csv"));
      if (j.contains("attencmp")) {
        const auto& a = j["attencmp"];
        cfg.attencmp_levels = a.value("levels", std::vector<int>{});
        if (a.contains("material")) cfg.attencmp_material = parse_material(a["material"]);
      }
      digest_src["medium"] = j["medium"];
      digest_src["uncertainty"] = j["uncertainty"];
      digest_src["source"] = j["source"];
      digest_src["geometry"] = j["geometry"];
      digest_src["c_cfl"] = cfg.solver.hierarchy.c_cfl;
      digest_src["scheme_revision"] = kSchemeRevision;
      digest_src["solver"] = j.value("solver", json::object());
      digest_src["data"] = d;
    }
    cfg.digest = fnv1a_hex(digest_src.dump());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str(), path.parent_path());
  cfg.source_path = path;
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  const auto& hier = cfg.solver.hierarchy;
  if (!(hier.h0 > 0.0 && hier.dt0 > 0.0 && hier.c_cfl > 0.0)) throw ConfigError("hierarchy: h0, dt0, c_cfl must be > 0");
  if (hier.l_max < 0) throw ConfigError("hierarchy: l_max must be >= 0");
  if (cfg.verification_counts.size() < 2) throw ConfigError("verification: need counts for at least levels 0 and 1");
  for (auto n : cfg.verification_counts)
    if (n < 2) throw ConfigError("verification: counts must be >= 2");
  if (!(cfg.c_alpha > 0.0)) throw ConfigError("c_alpha must be > 0");
  for (double t : cfg.study.tolerances)
    if (!(t > 0.0)) throw ConfigError("study: tolerances must be > 0");
  if (cfg.is_surrogate()) {
    cfg.surrogate.validate();
    return;
  }
  cfg.uncertainty.validate();
  cfg.source.validate();
  cfg.geometry.validate();
  if (cfg.data.material.size() != cfg.medium.size())
    throw ConfigError("data: material must have one entry per layer");
  if (cfg.attencmp_material && cfg.attencmp_material->size() != cfg.medium.size())
    throw ConfigError("attencmp: material must have one entry per layer");
  if (cfg.data.level <= hier.l_max) throw ConfigError("data: level must be finer than l_max");
  if (!(cfg.data.rate > 0.0)) throw ConfigError("data: rate must be > 0");
  const double dt_obs = 1.0 / cfg.data.rate;
  if (!is_multiple(dt_obs, hier.dt0) || dt_obs < hier.dt0 * (1 - 1e-12))
    throw ConfigError("data: observation interval must be a multiple of dt0 so every level samples the observation times");
  if (!is_multiple(cfg.source.horizon, dt_obs)) throw ConfigError("source: horizon must be a multiple of the observation interval");
  if (!is_multiple(cfg.source.t0, hier.dt0)) throw ConfigError("source: t0 must be a multiple of dt0");
  if (cfg.source.t0 > 0.0) throw ConfigError("source: t0 must be <= 0");
  const double pad = required_padding(cfg.uncertainty, cfg.medium, cfg.source.horizon, cfg.source.f0);
  if (cfg.geometry.pad_x < pad || cfg.geometry.pad_z < pad) {
    std::ostringstream msg;
    msg << "geometry: pads must be >= required padding " << pad << " m";
    throw ConfigError(msg.str());
  }
  if (!(cfg.solver.sponge_width > 0.0) || cfg.solver.sponge_width >= std::min(cfg.geometry.pad_x, cfg.geometry.pad_z))
    throw ConfigError("solver: sponge must fit inside the pads");
  // Stability of every admissible sample (the unrelaxed moduli are slightly stiffer).
  double scale = 1.0;
  if (cfg.solver.attenuation)
    for (const auto& l : cfg.medium.layers())
      scale = std::max(scale, fit_sls(l.q_factor, cfg.solver.sls_mechanisms,
                                      {cfg.source.f0 / 10.0, cfg.source.f0 * 10.0}, cfg.source.f0)
                                  .unrelaxed_scale);
  double vp = max_vp(cfg.medium, cfg.uncertainty);
  for (double x : cfg.data.material.vp) vp = std::max(vp, x);
  if (cfg.attencmp_material)
    for (double x : cfg.attencmp_material->vp) vp = std::max(vp, x);
  vp *= std::sqrt(scale);
  if (hier.dt0 > hier.c_cfl * hier.h0 / vp) {
    std::ostringstream msg;
    msg << "hierarchy: dt0 violates the stability bound " << hier.c_cfl * hier.h0 / vp
        << " s for vp_max " << vp << " m/s";
    throw ConfigError(msg.str());
  }
}

}  // namespace mlmcseis
