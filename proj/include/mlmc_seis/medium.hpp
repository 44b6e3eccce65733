#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mlmc_seis/rng.hpp"

namespace mlmcseis {

// One horizontal layer; the last layer of a medium is the half-space and
// carries no thickness.
struct LayerSpec {
  std::optional<double> thickness;  // m
  double rho_bar = 0.0;             // kg/m^3
  double vs_bar = 0.0;              // m/s
  double vp_bar = 0.0;              // m/s
  double q_factor = 0.0;
};

class LayeredMedium {
 public:
  LayeredMedium() = default;
  explicit LayeredMedium(std::vector<LayerSpec> layers);

  std::span<const LayerSpec> layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }

  // Index of the layer containing depth z (interfaces belong to the deeper layer).
  std::size_t layer_index(double z) const;
  // Depth of the top of layer i.
  double top_of(std::size_t i) const { return tops_.at(i); }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<double> tops_;
};

// Relative half-widths of the uniform ranges and the vp/vs ratio bounds.
struct UncertaintySpec {
  double q = 0.0;
  double r = 0.0;
  double nu_lb = 1.7;
  double nu_ub = 1.7;

  void validate() const;
};

struct MaterialSample {
  std::vector<double> rho;
  std::vector<double> vs;
  std::vector<double> vp;

  std::size_t size() const { return rho.size(); }
  friend bool operator==(const MaterialSample&, const MaterialSample&) = default;
};

struct PointMaterial {
  double rho;
  double vp;
  double vs;
  double q_factor;
};

MaterialSample sample_material(const LayeredMedium& medium, const UncertaintySpec& unc,
                               const SampleKey& key);

// The unperturbed values (rho_bar, vs_bar, vp_bar) as a sample.
MaterialSample nominal_material(const LayeredMedium& medium);

PointMaterial material_at_depth(const MaterialSample& sample, const LayeredMedium& medium,
                                double z);

// Largest vp reachable by any admissible sample.
double max_vp(const LayeredMedium& medium, const UncertaintySpec& unc);
// Smallest vs reachable by any admissible sample.
double min_vs(const LayeredMedium& medium, const UncertaintySpec& unc);

// True if every entry satisfies the bound invariants of `unc` around `medium`.
bool within_bounds(const MaterialSample& sample, const LayeredMedium& medium,
                   const UncertaintySpec& unc);

// Layer thicknesses and unperturbed values of the seven-layer rift model.
LayeredMedium rift_medium();
UncertaintySpec rift_uncertainty();

}  // namespace mlmcseis
