#include "mlmc_seis/data.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string material_digest(const MaterialSample& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (std::size_t i = 0; i < m.size(); ++i) {
    mix(m.rho[i]);
    mix(m.vs[i]);
    mix(m.vp[i]);
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void add_noise(DataSet& data, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ConfigError("data: sigma must be >= 0");
  data.sigma = sigma;
  if (sigma == 0.0) return;
  KeyedStream rng(seed);
  for (auto& tr : data.traces) {
    for (double& x : tr.ux) x += sigma * rng.normal();
    for (double& x : tr.uz) x += sigma * rng.normal();
  }
}

DataSet generate_synthetic(const SynthRequest& req, const LayeredMedium& medium) {
  if (req.fine_level <= req.hierarchy_max)
    throw ConfigError("synth: data level must be finer than every planned level");
  if (!(req.rate > 0.0)) throw ConfigError("synth: observation rate must be > 0");
  const Level fine = Level::make(req.options.hierarchy, req.fine_level);
  const double ratio = 1.0 / (req.rate * fine.dt);
  const double m = std::round(ratio);
  if (m < 1.0 || std::abs(ratio - m) > 1e-9 * ratio)
    throw ConfigError("synth: observation rate does not divide the fine sampling rate");
  const auto stride = static_cast<std::int64_t>(m);
  const double dt_data = fine.dt * m;
  const double steps = req.source.horizon / dt_data;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
    throw ConfigError("synth: horizon is not a multiple of the observation interval");

  const auto sim = simulate(req.material, medium, req.source, req.geometry, fine, req.options);
  DataSet data;
  data.rate = req.rate;
  TimeGrid grid{0, dt_data, static_cast<std::size_t>(std::llround(steps)) + 1};
  for (const auto& s : sim) {
    Seismogram tr;
    tr.receiver = s.receiver;
    tr.grid = grid;
    for (std::size_t k = 0; k < grid.count; ++k) {
      const auto j = static_cast<std::size_t>(static_cast<std::int64_t>(k) * stride - s.grid.first);
      tr.ux.push_back(s.ux[j]);
      tr.uz.push_back(s.uz[j]);
    }
    data.traces.push_back(std::move(tr));
  }
  add_noise(data, req.sigma, req.seed);

  auto& md = data.metadata;
  const auto& src = req.source;
  md["seed"] = std::to_string(req.seed);
  md["sigma"] = fmt17(req.sigma);
  md["rate"] = fmt17(req.rate);
  md["dt"] = fmt17(dt_data);
  md["samples"] = std::to_string(grid.count);
  md["level"] = std::to_string(req.fine_level);
  md["h"] = fmt17(fine.h);
  md["attenuation"] = req.options.attenuation ? "on" : "off";
  md["source"] = fmt17(src.x_s) + " " + fmt17(src.d_s);
  md["moment"] = fmt17(src.moment[0]) + " " + fmt17(src.moment[1]) + " " + fmt17(src.moment[2]);
  md["stf"] = fmt17(src.f0) + " " + fmt17(src.t_c) + " " + fmt17(src.t0) + " " + fmt17(src.horizon);
  md["material_digest"] = material_digest(req.material);
  return data;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta");
  return p;
}

void write_dataset(const DataSet& data, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  {
    std::ofstream out(csv_path);
    if (!out) throw ConfigError("cannot write " + csv_path.string());
    write_seismograms(out, data.traces);
  }
  std::ofstream meta(sidecar_path(csv_path));
  if (!meta) throw ConfigError("cannot write " + sidecar_path(csv_path).string());
  auto md = data.metadata;
  md["sigma"] = fmt17(data.sigma);
  md["rate"] = fmt17(data.rate);
  md["dt"] = fmt17(data.grid().dt);
  for (const auto& [k, v] : md) meta << k << " = " << v << '\n';
}

DataSet read_dataset(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("missing data file " + csv_path.string());
  DataSet data;
  data.traces = read_seismograms(in);
  std::ifstream meta(sidecar_path(csv_path));
  if (!meta) throw ConfigError("missing data sidecar " + sidecar_path(csv_path).string());
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    data.metadata[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto num = [&](const char* key) {
    const auto it = data.metadata.find(key);
    if (it == data.metadata.end()) throw ConfigError(std::string("data sidecar lacks ") + key);
    return std::stod(it->second);
  };
  data.sigma = num("sigma");
  data.rate = num("rate");
  const double dt = num("dt");
  for (auto& tr : data.traces) {
    tr.grid.first = std::llround(tr.grid.start() / dt);
    tr.grid.dt = dt;
  }
  return data;
}

}  // namespace mlmcseis
