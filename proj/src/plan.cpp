#include "mlmc_seis/plan.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mlmc_seis/calibrate.hpp"
#include "mlmc_seis/error.hpp"

namespace mlmcseis {

std::string to_string(PlanKind k) { return k == PlanKind::kMC ? "MC" : "MLMC"; }

std::vector<long long> optimal_samples(double tol, double theta, double c_alpha,
                                       std::span<const double> variances,
                                       std::span<const double> works) {
  if (!(tol > 0.0)) throw ConfigError("optimal_samples: tol must be > 0");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("optimal_samples: theta must be in (0, 1)");
  if (variances.size() != works.size() || variances.empty())
    throw ConfigError("optimal_samples: need matching nonempty variances and works");
  double sum = 0.0;
  for (std::size_t l = 0; l < works.size(); ++l) {
    if (!(variances[l] > 0.0 && works[l] > 0.0))
      throw ConfigError("optimal_samples: variances and works must be > 0");
    sum += std::sqrt(works[l] * variances[l]);
  }
  const double scale = std::pow(c_alpha / (theta * tol), 2);
  std::vector<long long> n(works.size());
  for (std::size_t l = 0; l < works.size(); ++l) {
    const double star = scale * std::sqrt(variances[l] / works[l]) * sum;
    n[l] = std::max(2LL, static_cast<long long>(std::ceil(star)));
  }
  return n;
}

Plan plan_for_pair(double tol, double c_alpha, int l0, int L, const RateModels& rm) {
  Plan p;
  p.kind = l0 == L ? PlanKind::kMC : PlanKind::kMLMC;
  p.l0 = l0;
  p.L = L;
  p.c_alpha = c_alpha;
  p.tol = tol;
  p.predicted_bias = model_bias(rm, L);
  if (!(p.predicted_bias < tol)) throw InfeasibleTolerance("bias exceeds tolerance", p.predicted_bias);
  p.theta = 1.0 - p.predicted_bias / tol;
  std::vector<double> v, w;
  for (int l = l0; l <= L; ++l) {
    v.push_back(model_variance(rm, l, l0));
    w.push_back(model_work(rm, l));
  }
  p.samples = optimal_samples(tol, p.theta, c_alpha, v, w);
  for (std::size_t k = 0; k < v.size(); ++k) {
    p.predicted_work += static_cast<double>(p.samples[k]) * w[k];
    p.predicted_variance += v[k] / static_cast<double>(p.samples[k]);
  }
  return p;
}

namespace {

[[noreturn]] void infeasible(double tol, int l_max, const RateModels& rm) {
  double best = std::numeric_limits<double>::infinity();
  for (int L = 0; L <= l_max; ++L) best = std::min(best, model_bias(rm, L));
  std::ostringstream msg;
  msg << "tolerance " << tol << " is infeasible up to level " << l_max
      << "; smallest achievable bias " << best;
  throw InfeasibleTolerance(msg.str(), best);
}

}  // namespace

Plan select_hierarchy(double tol, double c_alpha, int l_max, const RateModels& rm) {
  Plan best;
  bool found = false;
  for (int L = 0; L <= l_max; ++L) {
    if (!(model_bias(rm, L) < tol)) continue;
    for (int l0 = 0; l0 <= L; ++l0) {
      Plan p = plan_for_pair(tol, c_alpha, l0, L, rm);
      p.kind = PlanKind::kMLMC;
      // Strict comparison keeps the earlier (smaller L, then smaller l0) plan on ties.
      if (!found || p.predicted_work < best.predicted_work) {
        best = p;
        found = true;
      }
    }
  }
  if (!found) infeasible(tol, l_max, rm);
  return best;
}

Plan select_mc(double tol, double c_alpha, int l_max, const RateModels& rm) {
  Plan best;
  bool found = false;
  for (int L = 0; L <= l_max; ++L) {
    if (!(model_bias(rm, L) < tol)) continue;
    Plan p = plan_for_pair(tol, c_alpha, L, L, rm);
    p.kind = PlanKind::kMC;
    if (!found || p.predicted_work < best.predicted_work) {
      best = p;
      found = true;
    }
  }
  if (!found) infeasible(tol, l_max, rm);
  return best;
}

double mc_optimal_splitting(double gamma, double q_w) {
  if (!(gamma >= 0.0 && q_w > 0.0)) throw ConfigError("mc_optimal_splitting: need gamma >= 0, q_w > 0");
  return 1.0 / (1.0 + gamma / (2.0 * q_w));
}

std::vector<double> tolerance_schedule(double tol1, int k_max) {
  if (!(tol1 > 0.0)) throw ConfigError("tolerance_schedule: tol1 must be > 0");
  std::vector<double> out;
  for (int k = 1; k <= k_max; ++k) out.push_back(tol1 * std::pow(std::sqrt(0.5), k - 1));
  return out;
}

}  // namespace mlmcseis
