#pragma once

#include <utility>
#include <vector>

namespace mlmcseis {

// Generalized Zener body: B relaxation mechanisms acting on the unrelaxed
// modulus M_U.  In the frequency domain
//   M(w) = M_U * (1 - sum_b Y_b w_b / (w_b + i w)),
// so each mechanism contributes a memory variable driven by the elastic
// stress rate.
struct SlsCoefficients {
  std::vector<double> omega;   // relaxation angular frequencies, rad/s, increasing
  std::vector<double> weight;  // Y_b >= 0
  // M_U / M_ref, where M_ref = rho v^2 is the modulus the tabulated
  // velocities describe at the reference frequency.
  double unrelaxed_scale = 1.0;

  std::size_t size() const { return omega.size(); }
  bool elastic() const;
};

// Q(w) = Re M(w) / Im M(w) of the modeled body.  +inf when all weights vanish.
double modeled_q(const SlsCoefficients& sls, double omega);

// Fits B mechanisms with log-spaced relaxation frequencies spanning the band
// [f_min, f_max] Hz so that the modeled Q tracks q_target.  The weights solve
// the exact linear relation
//   Q^-1 (1 - sum Y_b a_b(w)) = sum Y_b c_b(w)
// in the least-squares sense on a log grid.  `f_ref` is the frequency at
// which the tabulated velocities are honoured (sets unrelaxed_scale).
// Throws SolverFailure when the band error exceeds `max_rel_error`.
SlsCoefficients fit_sls(double q_target, int mechanisms, std::pair<double, double> band_hz,
                        double f_ref_hz, double max_rel_error = 0.10);

// Largest relative deviation |Q(w) - q_target| / q_target on a dense log
// sweep of the band.
double band_error(const SlsCoefficients& sls, double q_target, std::pair<double, double> band_hz,
                  int points = 2001);

}  // namespace mlmcseis
