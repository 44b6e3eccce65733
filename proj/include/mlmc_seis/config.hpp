#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlmc_seis/medium.hpp"
#include "mlmc_seis/model.hpp"
#include "mlmc_seis/solver.hpp"
#include "mlmc_seis/surrogate.hpp"

namespace mlmcseis {

struct DataConfig {
  int level = 5;
  double rate = 20.0;   // Hz
  double sigma = 0.0;   // m, absolute noise level
  // When set, sigma = sigma_relative * max |u| of the noiseless traces.
  std::optional<double> sigma_relative;
  std::uint64_t seed = 1;
  MaterialSample material;  // the "true" parameters
  std::string file = "data.csv";
};

struct StudyConfig {
  std::vector<double> tolerances;
  bool run_mc = false;
  double mc_work_limit_s = 0.0;  // execute MC only below this predicted work
  int bootstrap_replicates = 1000;
};

struct RunConfig {
  std::filesystem::path source_path;
  std::string model = "solver";  // solver | surrogate
  QoiKind qoi = QoiKind::kE;
  LayeredMedium medium;
  UncertaintySpec uncertainty;
  SourceSpec source;
  Geometry geometry;
  SolverOptions solver;
  DataConfig data;
  SurrogateSpec surrogate;
  double gamma = 3.0;
  double q_w = 2.0;
  double q_s = 4.0;
  std::vector<std::size_t> verification_counts;
  int bootstrap_resamples = 1000;
  double c_alpha = 2.0;
  StudyConfig study;
  std::vector<int> attencmp_levels;
  std::optional<MaterialSample> attencmp_material;
  std::uint64_t seed = 1;
  int workers = 1;
  std::filesystem::path output_dir;
  // Digest of every field that influences sample values.
  std::string digest;

  bool is_surrogate() const { return model == "surrogate"; }
  int l_max() const { return solver.hierarchy.l_max; }
  int l_ver() const { return static_cast<int>(verification_counts.size()) - 1; }
  // Tag used in output file names: E, W, or S for the surrogate.
  std::string qoi_tag() const;
  std::filesystem::path out(const std::string& name) const { return output_dir / name; }
};

// Parses and validates a configuration.  Relative output paths resolve
// against the directory of the configuration file.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

// Consistency checks: observation grid vs time steps, padding, stability of
// every admissible sample at every level.  Throws ConfigError.
void validate_config(const RunConfig& cfg);

// Configured worker count, overridden by MLMC_SEIS_WORKERS when set.
int resolve_workers(int configured);

std::string fnv1a_hex(const std::string& text);

}  // namespace mlmcseis
