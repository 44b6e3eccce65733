#include "mlmc_seis/model.hpp"

#include "mlmc_seis/error.hpp"
#include "mlmc_seis/qoi.hpp"

namespace mlmcseis {

std::string to_string(QoiKind k) { return k == QoiKind::kE ? "E" : "W"; }

QoiKind parse_qoi_kind(const std::string& s) {
  if (s == "E" || s == "e") return QoiKind::kE;
  if (s == "W" || s == "w") return QoiKind::kW;
  throw ConfigError("unknown QoI kind '" + s + "' (expected E or W)");
}

SurrogateModel::SurrogateModel(SurrogateSpec spec) : spec_(spec) { spec_.validate(); }

LevelEval SurrogateModel::evaluate(const SampleKey& key, int level) const {
  const auto theta = surrogate_theta(spec_, key);
  const auto r = surrogate_eval(spec_, theta, level);
  return {r.value, r.work};
}

WaveModel::WaveModel(WaveSetup setup, std::shared_ptr<const DataSet> data, QoiKind kind)
    : setup_(std::move(setup)), data_(std::move(data)), kind_(kind) {
  if (!data_) throw ConfigError("wave model needs a data set");
  setup_.uncertainty.validate();
}

LevelEval WaveModel::evaluate_material(const MaterialSample& m, int level) const {
  LevelEval out;
  out.work_s = measure_work([&] {
    const auto seis = simulate(m, setup_.medium, setup_.source, setup_.geometry,
                               Level::make(setup_.options.hierarchy, level), setup_.options);
    out.value = kind_ == QoiKind::kE ? qoi_e(seis, *data_) : qoi_w(seis, *data_);
  });
  return out;
}

LevelEval WaveModel::evaluate(const SampleKey& key, int level) const {
  return evaluate_material(sample_material(setup_.medium, setup_.uncertainty, key), level);
}

}  // namespace mlmcseis
