#pragma once

#include <utility>
#include <vector>

#include "mlmc_seis/solver.hpp"

namespace mlmcseis {

struct DataSet;

// Piecewise-linear function through (t_k, v_k), t strictly increasing.
struct SignedSeries {
  std::vector<double> t;
  std::vector<double> v;

  void validate() const;
  std::size_t size() const { return t.size(); }
};

// Normalized cumulative distribution of a nonnegative piecewise-linear
// density, by the trapezoid rule on the density's knots.
struct DiscreteCdf {
  std::vector<double> t;  // abscissae (normalized time)
  std::vector<double> p;  // nondecreasing, p.front() == 0, p.back() == 1

  static DiscreteCdf from_density(const SignedSeries& density);
  // Left-continuous generalized inverse inf{t : F(t) >= p}, linear between
  // knots; at p = 0 it returns the start of the support.
  double inverse(double prob) const;
};

double trapezoid(const SignedSeries& s);

// Splits a series into max(v, 0) and min(v, 0) on a common grid that gains a
// knot at every linear zero crossing between samples of opposite sign.
std::pair<SignedSeries, SignedSeries> split_signs(const SignedSeries& series);

// Squared quadratic Wasserstein distance between two nonnegative densities
// after normalization to unit mass.  Both inverse CDFs are evaluated at the
// union of the two CDF value sets and the squared difference is integrated
// over [0, 1] by the trapezoid rule.
double w2_squared(const SignedSeries& f, const SignedSeries& g);

// Per-pair contribution to the Wasserstein misfit of one signal component:
// W2^2 of the positive parts plus W2^2 of the (sign-flipped) negative parts;
// a pair where exactly one part vanishes identically contributes 1.
double wasserstein_misfit(const SignedSeries& sim, const SignedSeries& data);

// L2 misfit (1/T) sum_n int_0^T |u - d|^2 dt, trapezoid on the simulation grid.
double qoi_e(const std::vector<Seismogram>& sim, const DataSet& data);
// Wasserstein misfit summed over receivers and components, in normalized time t / T.
double qoi_w(const std::vector<Seismogram>& sim, const DataSet& data);

// The part t >= 0 of one simulated trace component, in normalized time.
SignedSeries normalized_trace(const Seismogram& s, int component, double horizon);

}  // namespace mlmcseis
