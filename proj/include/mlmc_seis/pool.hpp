#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mlmc_seis/rng.hpp"

namespace mlmcseis {

// One coupled evaluation (Q_l, Q_{l-1}) on a single random draw; the coarse
// value is absent for base-level (fine-only) samples.
struct CorrectionSample {
  std::string qoi_kind;
  std::uint64_t run = 0;
  int level = 0;
  std::uint64_t index = 0;
  std::uint64_t seed = 0;  // digest of (run, level, index)
  double fine = 0.0;
  std::optional<double> coarse;
  double work_s = 0.0;       // fine + coarse evaluation
  double fine_work_s = 0.0;  // fine evaluation only
  std::string timestamp;

  SampleKey key() const { return {run, level, index}; }
  // Q_l - Q_{l-1}; requires a coarse value.
  double delta() const { return fine - coarse.value(); }
};

struct PoolProvenance {
  std::string qoi_kind;
  std::string model_id;
  std::string config_digest;

  friend bool operator==(const PoolProvenance&, const PoolProvenance&) = default;
};

// Append-only store of correction samples, optionally backed by a
// line-delimited JSON file (first line: provenance, then one record per
// sample).  Appends are written through immediately.
class SamplePool {
 public:
  SamplePool() = default;
  explicit SamplePool(PoolProvenance provenance) : provenance_(std::move(provenance)) {}

  // Loads `path` if it exists (its provenance must match) and persists all
  // further appends to it.
  static SamplePool open(const std::filesystem::path& path, const PoolProvenance& provenance);
  // Read-only load.
  static SamplePool load(const std::filesystem::path& path);

  const PoolProvenance& provenance() const { return provenance_; }

  // Rejects a duplicate (run, level, index).
  void append(const CorrectionSample& s);
  void append_batch(const std::vector<CorrectionSample>& batch);

  bool contains(std::uint64_t run, int level, std::uint64_t index) const;
  const CorrectionSample* find(std::uint64_t run, int level, std::uint64_t index) const;

  // Samples at `level`, ordered by (run, index), optionally restricted to one run.
  std::vector<const CorrectionSample*> at_level(int level,
                                                std::optional<std::uint64_t> run = std::nullopt) const;
  std::vector<int> levels() const;
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

 private:
  void write_line(const std::string& line);

  PoolProvenance provenance_;
  std::map<int, std::map<std::pair<std::uint64_t, std::uint64_t>, CorrectionSample>> samples_;
  std::size_t count_ = 0;
  std::optional<std::filesystem::path> path_;
};

std::string sample_to_json(const CorrectionSample& s);
CorrectionSample sample_from_json(const std::string& line);

}  // namespace mlmcseis
