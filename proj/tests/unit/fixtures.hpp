#pragma once

#include <optional>
#include <vector>

#include "mlmc_seis/medium.hpp"
#include "mlmc_seis/model.hpp"
#include "mlmc_seis/solver.hpp"

namespace mlmcseis::testing {

inline LayeredMedium homogeneous_medium(double rho, double vs, double vp, double q = 1e4) {
  return LayeredMedium({{std::nullopt, rho, vs, vp, q}});
}

inline LayeredMedium two_layer_medium() {
  return LayeredMedium({{2500.0, 2500.0, 3529.0, 6034.6, 300.0}, {std::nullopt, 2900.0, 4422.7, 7562.8, 600.0}});
}

// Small layered problem: a few tenths of a second per level-1 solve.
inline WaveSetup small_setup() {
  WaveSetup s;
  s.medium = two_layer_medium();
  s.uncertainty = UncertaintySpec{0.1, 0.1, 1.64, 1.78};
  s.source.x_s = 0.0;
  s.source.d_s = 3500.0;
  s.source.moment = {5.5895e13, -2.5698e14, 7.9762e13};
  s.source.f0 = 1.0;
  s.source.t_c = 0.0;
  s.source.t0 = -1.2;
  s.source.horizon = 4.0;
  s.geometry.receiver_offsets = {3000.0, 6000.0};
  s.geometry.receiver_depth = 0.0;
  s.geometry.pad_x = 18000.0;
  s.geometry.pad_z = 18000.0;
  s.options.hierarchy = Hierarchy{1000.0, 0.05, 0.45, 2};
  s.options.sponge_width = 12000.0;
  s.options.sponge_alpha = 5.0;
  return s;
}

inline std::vector<Seismogram> solve(const WaveSetup& s, const MaterialSample& m, int level,
                                     bool attenuation = true) {
  auto opts = s.options;
  opts.attenuation = attenuation;
  return simulate(m, s.medium, s.source, s.geometry, Level::make(opts.hierarchy, level), opts);
}

}  // namespace mlmcseis::testing
