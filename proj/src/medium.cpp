#include "mlmc_seis/medium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

LayeredMedium::LayeredMedium(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("medium: no layers");
  double top = 0.0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const bool terminal = i + 1 == layers_.size();
    if (terminal == l.thickness.has_value())
      throw ConfigError("medium: exactly the last layer must omit its thickness");
    if (!terminal && !(*l.thickness > 0.0))
      throw ConfigError("medium: layer " + std::to_string(i + 1) + " thickness must be > 0");
    if (!(l.rho_bar > 0.0 && l.vs_bar > 0.0 && l.vp_bar > 0.0 && l.q_factor > 0.0))
      throw ConfigError("medium: layer " + std::to_string(i + 1) + " has non-positive values");
    if (!(l.vp_bar > l.vs_bar))
      throw ConfigError("medium: layer " + std::to_string(i + 1) + " needs vp > vs");
    tops_.push_back(top);
    if (!terminal) top += *l.thickness;
  }
}

std::size_t LayeredMedium::layer_index(double z) const {
  // upper_bound: a depth equal to a layer top belongs to that (deeper) layer.
  const auto it = std::upper_bound(tops_.begin(), tops_.end(), z);
  return it == tops_.begin() ? 0 : static_cast<std::size_t>(it - tops_.begin()) - 1;
}

void UncertaintySpec::validate() const {
  if (!(q >= 0.0 && q < 1.0)) throw ConfigError("uncertainty: q must lie in [0, 1)");
  if (!(r >= 0.0 && r < 1.0)) throw ConfigError("uncertainty: r must lie in [0, 1)");
  if (!(nu_lb > 1.0 && nu_lb <= nu_ub)) throw ConfigError("uncertainty: need 1 < nu_lb <= nu_ub");
}

MaterialSample sample_material(const LayeredMedium& medium, const UncertaintySpec& unc,
                               const SampleKey& key) {
  if (medium.empty()) throw ConfigError("sample_material: empty medium");
  unc.validate();
  KeyedStream stream(key);
  MaterialSample s;
  const auto n = medium.size();
  s.rho.resize(n);
  s.vs.resize(n);
  s.vp.resize(n);
  // Fixed draw order per layer: vs, vp | vs, rho.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = medium.layers()[i];
    s.vs[i] = stream.uniform((1.0 - unc.q) * l.vs_bar, (1.0 + unc.q) * l.vs_bar);
    s.vp[i] = stream.uniform(unc.nu_lb * s.vs[i], unc.nu_ub * s.vs[i]);
    s.rho[i] = stream.uniform((1.0 - unc.r) * l.rho_bar, (1.0 + unc.r) * l.rho_bar);
  }
  return s;
}

MaterialSample nominal_material(const LayeredMedium& medium) {
  MaterialSample s;
  for (const auto& l : medium.layers()) {
    s.rho.push_back(l.rho_bar);
    s.vs.push_back(l.vs_bar);
    s.vp.push_back(l.vp_bar);
  }
  return s;
}

PointMaterial material_at_depth(const MaterialSample& sample, const LayeredMedium& medium,
                                double z) {
  const auto i = medium.layer_index(z);
  return {sample.rho.at(i), sample.vp.at(i), sample.vs.at(i), medium.layers()[i].q_factor};
}

double max_vp(const LayeredMedium& medium, const UncertaintySpec& unc) {
  double v = 0.0;
  for (const auto& l : medium.layers())
    v = std::max({v, unc.nu_ub * (1.0 + unc.q) * l.vs_bar, l.vp_bar});
  return v;
}

double min_vs(const LayeredMedium& medium, const UncertaintySpec& unc) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& l : medium.layers()) v = std::min(v, (1.0 - unc.q) * l.vs_bar);
  return v;
}

bool within_bounds(const MaterialSample& s, const LayeredMedium& medium,
                   const UncertaintySpec& unc) {
  if (s.size() != medium.size() || s.vs.size() != s.size() || s.vp.size() != s.size())
    return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& l = medium.layers()[i];
    const bool ok = std::isfinite(s.rho[i]) && std::isfinite(s.vs[i]) && std::isfinite(s.vp[i]) &&
                    s.rho[i] > 0.0 && s.vs[i] > 0.0 && s.vp[i] > 0.0 &&
                    s.rho[i] >= (1.0 - unc.r) * l.rho_bar && s.rho[i] <= (1.0 + unc.r) * l.rho_bar &&
                    s.vs[i] >= (1.0 - unc.q) * l.vs_bar && s.vs[i] <= (1.0 + unc.q) * l.vs_bar &&
                    s.vp[i] >= unc.nu_lb * s.vs[i] && s.vp[i] <= unc.nu_ub * s.vs[i];
    if (!ok) return false;
  }
  return true;
}

LayeredMedium rift_medium() {
  // thickness [m], rho_bar, vs_bar, vp_bar, Q
  return LayeredMedium({
      {10000.0, 2500.0, 3529.0, 6034.6, 300.0},
      {10000.0, 2500.0, 3705.0, 6335.6, 300.0},
      {10000.0, 2500.0, 3882.0, 6638.2, 800.0},
      {5000.0, 2500.0, 3911.0, 6687.8, 800.0},
      {5000.0, 2900.0, 4422.7, 7562.8, 800.0},
      {10000.0, 2900.0, 4506.4, 7705.9, 600.0},
      {std::nullopt, 2900.0, 4533.6, 7752.5, 600.0},
  });
}

UncertaintySpec rift_uncertainty() { return {0.1, 0.1, 1.64, 1.78}; }

}  // namespace mlmcseis
