#pragma once

// Independent reference implementations used to check the library: they
// share no code with it and are written directly from the defining formulas.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

// Calibration data in plain arrays (levels 0..l_ver).
struct Rates {
  double gamma = 3, q_w = 2, q_s = 4;
  int l_ver = 0;
  std::vector<double> work, bias, var_fine, var_corr;
};

inline double work(const Rates& r, int l) {
  return l <= r.l_ver ? r.work[l] : r.work[r.l_ver] * std::pow(2.0, r.gamma * (l - r.l_ver));
}
inline double bias(const Rates& r, int l) {
  return l < r.l_ver ? r.bias[l + 1] : r.bias[r.l_ver] * std::pow(2.0, -r.q_w * (l - r.l_ver + 1));
}
inline double variance(const Rates& r, int l, int l0) {
  if (l == l0) return r.var_fine[std::min(l0, r.l_ver)];
  return l <= r.l_ver ? r.var_corr[l] : r.var_corr[r.l_ver] * std::pow(2.0, -r.q_s * (l - r.l_ver));
}

struct Choice {
  int l0 = -1, L = -1;
  std::vector<long long> n;
  double work = std::numeric_limits<double>::infinity();
};

// Every (l0, L) pair evaluated from scratch; the cheapest wins, earlier pairs
// in (L, l0) order win exact ties.
inline std::optional<Choice> exhaustive_plan(double tol, double c_alpha, int l_max, const Rates& r,
                                             bool single_level_only = false) {
  std::optional<Choice> best;
  for (int L = 0; L <= l_max; ++L) {
    const double b = bias(r, L);
    if (b >= tol) continue;
    const double theta = 1.0 - b / tol;
    for (int l0 = single_level_only ? L : 0; l0 <= L; ++l0) {
      double s = 0;
      for (int l = l0; l <= L; ++l) s += std::sqrt(work(r, l) * variance(r, l, l0));
      Choice c{l0, L, {}, 0.0};
      for (int l = l0; l <= L; ++l) {
        const double star = (c_alpha / (theta * tol)) * (c_alpha / (theta * tol)) *
                            std::sqrt(variance(r, l, l0) / work(r, l)) * s;
        const long long n = std::max<long long>(2, static_cast<long long>(std::ceil(star)));
        c.n.push_back(n);
        c.work += static_cast<double>(n) * work(r, l);
      }
      if (!best || c.work < best->work) best = c;
    }
  }
  return best;
}

// Random but plausible calibration: growing work, decaying bias and variance
// anchors with noise, so that the optimum moves around between draws.
inline Rates random_rates(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Rates r;
  r.l_ver = 1 + static_cast<int>(gen() % 4);
  r.gamma = 2.0 + 2.0 * u(gen);
  r.q_w = 1.0 + 2.0 * u(gen);
  r.q_s = 2.0 + 4.0 * u(gen);
  double w = std::pow(10.0, -3.0 + 2.0 * u(gen));
  double b = std::pow(10.0, -2.0 + 2.0 * u(gen));
  double vc = std::pow(10.0, -4.0 + 2.0 * u(gen));
  for (int l = 0; l <= r.l_ver; ++l) {
    r.work.push_back(w);
    r.bias.push_back(l == 0 ? 0.0 : b);
    r.var_fine.push_back(std::pow(10.0, -3.0 + 2.0 * u(gen)));
    r.var_corr.push_back(l == 0 ? 0.0 : vc);
    w *= std::pow(2.0, r.gamma) * (0.7 + 0.6 * u(gen));
    b *= std::pow(2.0, -r.q_w) * (0.5 + 1.0 * u(gen));
    vc *= std::pow(2.0, -r.q_s) * (0.3 + 1.5 * u(gen));
  }
  return r;
}

// Q(w) of a generalized Zener body with relative modulus
// 1 - sum_b Y_b w_b / (w_b + i w), in real arithmetic:
// Re = 1 - sum Y_b w_b^2 / (w_b^2 + w^2), Im = sum Y_b w_b w / (w_b^2 + w^2).
inline double zener_q(const std::vector<double>& omega, const std::vector<double>& y, double w) {
  double re = 1.0, im = 0.0;
  for (std::size_t b = 0; b < omega.size(); ++b) {
    const double den = omega[b] * omega[b] + w * w;
    re -= y[b] * omega[b] * omega[b] / den;
    im += y[b] * omega[b] * w / den;
  }
  return re / im;
}

}  // namespace oracle
