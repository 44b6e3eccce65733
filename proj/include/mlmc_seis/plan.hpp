#pragma once

#include <span>
#include <string>
#include <vector>

namespace mlmcseis {

struct RateModels;

enum class PlanKind { kMC, kMLMC };

// Estimator hierarchy for one tolerance.
struct Plan {
  PlanKind kind = PlanKind::kMLMC;
  int l0 = 0;
  int L = 0;
  std::vector<long long> samples;  // N_l for l = l0..L
  double theta = 0.5;
  double c_alpha = 2.0;
  double tol = 0.0;
  double predicted_work = 0.0;      // sum N_l W_l, s
  double predicted_bias = 0.0;
  double predicted_variance = 0.0;  // sum V_l / N_l

  std::size_t count(int level) const { return static_cast<std::size_t>(samples.at(static_cast<std::size_t>(level - l0))); }
  int levels() const { return L - l0 + 1; }
};

std::string to_string(PlanKind k);

// N_l = max(2, ceil((C/(theta tol))^2 sqrt(V_l / W_l) sum_k sqrt(W_k V_k))).
std::vector<long long> optimal_samples(double tol, double theta, double c_alpha,
                                       std::span<const double> variances,
                                       std::span<const double> works);

// Exhaustive search over 0 <= l0 <= L <= l_max for the cheapest feasible
// MLMC hierarchy; ties go to smaller L, then smaller l0.
// Throws InfeasibleTolerance when no L has model bias below tol.
Plan select_hierarchy(double tol, double c_alpha, int l_max, const RateModels& rm);

// Cheapest single-level Monte Carlo plan.
Plan select_mc(double tol, double c_alpha, int l_max, const RateModels& rm);

// Plan for a fixed (l0, L) pair; theta = 1 - bias / tol.  Requires bias < tol.
Plan plan_for_pair(double tol, double c_alpha, int l0, int L, const RateModels& rm);

// Asymptotically optimal splitting of plain MC, (1 + gamma / (2 q_w))^-1.
double mc_optimal_splitting(double gamma, double q_w);

// tol_k = tol1 (1/sqrt 2)^(k-1), k = 1..k_max.
std::vector<double> tolerance_schedule(double tol1, int k_max);

}  // namespace mlmcseis
