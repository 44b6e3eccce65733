#pragma once

#include <memory>
#include <string>

#include "mlmc_seis/data.hpp"
#include "mlmc_seis/medium.hpp"
#include "mlmc_seis/rng.hpp"
#include "mlmc_seis/solver.hpp"
#include "mlmc_seis/surrogate.hpp"

namespace mlmcseis {

enum class QoiKind { kE, kW };

std::string to_string(QoiKind k);
QoiKind parse_qoi_kind(const std::string& s);

struct LevelEval {
  double value = 0.0;
  double work_s = 0.0;
};

// Level-parameterized random quantity of interest.  The random input is a
// pure function of the sample key, so evaluating one key at two levels gives
// a coupled pair.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;
  virtual std::string id() const = 0;
  virtual std::string qoi_kind() const = 0;
  virtual LevelEval evaluate(const SampleKey& key, int level) const = 0;
};

class SurrogateModel final : public ForwardModel {
 public:
  explicit SurrogateModel(SurrogateSpec spec);
  std::string id() const override { return "surrogate"; }
  std::string qoi_kind() const override { return "S"; }
  LevelEval evaluate(const SampleKey& key, int level) const override;
  const SurrogateSpec& spec() const { return spec_; }

 private:
  SurrogateSpec spec_;
};

struct WaveSetup {
  LayeredMedium medium;
  UncertaintySpec uncertainty;
  SourceSpec source;
  Geometry geometry;
  SolverOptions options;
};

// Wave solver plus misfit against a fixed data set.  Work is the thread CPU
// time of the solve and the misfit evaluation.
class WaveModel final : public ForwardModel {
 public:
  WaveModel(WaveSetup setup, std::shared_ptr<const DataSet> data, QoiKind kind);
  std::string id() const override { return "solver"; }
  std::string qoi_kind() const override { return to_string(kind_); }
  LevelEval evaluate(const SampleKey& key, int level) const override;

  // QoI of a given material at a level (no sampling).
  LevelEval evaluate_material(const MaterialSample& m, int level) const;
  const WaveSetup& setup() const { return setup_; }

 private:
  WaveSetup setup_;
  std::shared_ptr<const DataSet> data_;
  QoiKind kind_;
};

}  // namespace mlmcseis
