#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mlmc_seis/medium.hpp"
#include "mlmc_seis/solver.hpp"

namespace mlmcseis {

// Observed (synthetic) seismograms on a uniform grid over [0, T].
struct DataSet {
  std::vector<Seismogram> traces;
  double sigma = 0.0;  // m
  double rate = 0.0;   // Hz
  // Generation record, written as `key = value` lines.
  std::map<std::string, std::string> metadata;

  const TimeGrid& grid() const { return traces.front().grid; }
  double horizon() const { return grid().end(); }
};

struct SynthRequest {
  SourceSpec source;
  MaterialSample material;
  Geometry geometry;
  SolverOptions options;
  int fine_level = 0;
  int hierarchy_max = 0;  // largest level of any planned estimator
  double rate = 0.0;      // Hz
  double sigma = 0.0;     // m
  std::uint64_t seed = 0;
};

// Fine-level solve restricted to the observation grid, plus i.i.d. N(0, sigma^2)
// noise on every component.  Deterministic given the request.
DataSet generate_synthetic(const SynthRequest& req, const LayeredMedium& medium);

// Adds noise to an existing noiseless set (used by generate_synthetic).
void add_noise(DataSet& data, double sigma, std::uint64_t seed);

// Stable digest of a material sample (hex string).
std::string material_digest(const MaterialSample& m);

void write_dataset(const DataSet& data, const std::filesystem::path& csv_path);
DataSet read_dataset(const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace mlmcseis
