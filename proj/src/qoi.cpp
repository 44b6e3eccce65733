#include "mlmc_seis/qoi.hpp"

#include <algorithm>
#include <cmath>

#include "mlmc_seis/data.hpp"
#include "mlmc_seis/error.hpp"

namespace mlmcseis {

void SignedSeries::validate() const {
  if (t.size() < 2 || t.size() != v.size()) throw ConfigError("series: need >= 2 matching knots");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (!(t[k] > t[k - 1])) throw ConfigError("series: knots must be strictly increasing");
  for (double x : v)
    if (!std::isfinite(x)) throw ConfigError("series: non-finite value");
}

double trapezoid(const SignedSeries& s) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) acc += 0.5 * (s.t[k + 1] - s.t[k]) * (s.v[k] + s.v[k + 1]);
  return acc;
}

DiscreteCdf DiscreteCdf::from_density(const SignedSeries& density) {
  DiscreteCdf cdf;
  cdf.t = density.t;
  cdf.p.assign(density.size(), 0.0);
  for (std::size_t k = 0; k + 1 < density.size(); ++k)
    cdf.p[k + 1] = cdf.p[k] + 0.5 * (density.t[k + 1] - density.t[k]) * (density.v[k] + density.v[k + 1]);
  const double total = cdf.p.back();
  if (!(total > 0.0)) throw ConfigError("cdf: density has zero mass");
  for (double& x : cdf.p) x /= total;
  cdf.p.back() = 1.0;
  return cdf;
}

double DiscreteCdf::inverse(double prob) const {
  if (prob <= 0.0) {
    // Start of the support: last knot where the CDF is still zero.
    std::size_t k = 0;
    while (k + 1 < p.size() && p[k + 1] == 0.0) ++k;
    return t[k];
  }
  if (prob >= 1.0) {
    const auto it = std::lower_bound(p.begin(), p.end(), 1.0);
    return t[static_cast<std::size_t>(it - p.begin())];
  }
  const auto k = static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), prob) - p.begin());
  // p[k-1] < prob <= p[k]
  const double frac = (prob - p[k - 1]) / (p[k] - p[k - 1]);
  return t[k - 1] + frac * (t[k] - t[k - 1]);
}

std::pair<SignedSeries, SignedSeries> split_signs(const SignedSeries& series) {
  series.validate();
  SignedSeries pos, neg;
  auto push = [&](double t, double v) {
    pos.t.push_back(t);
    neg.t.push_back(t);
    pos.v.push_back(std::max(v, 0.0));
    neg.v.push_back(std::min(v, 0.0));
  };
  for (std::size_t k = 0; k < series.size(); ++k) {
    push(series.t[k], series.v[k]);
    if (k + 1 < series.size()) {
      const double a = series.v[k], b = series.v[k + 1];
      if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) {
        const double tz = series.t[k] + (series.t[k + 1] - series.t[k]) * a / (a - b);
        if (tz > series.t[k] && tz < series.t[k + 1]) push(tz, 0.0);
      }
    }
  }
  return {pos, neg};
}

namespace {

bool identically_zero(const SignedSeries& s) {
  return std::all_of(s.v.begin(), s.v.end(), [](double x) { return x == 0.0; });
}

SignedSeries absolute(SignedSeries s) {
  for (double& x : s.v) x = std::abs(x);
  return s;
}

}  // namespace

double w2_squared(const SignedSeries& f, const SignedSeries& g) {
  f.validate();
  g.validate();
  for (const auto* s : {&f, &g})
    for (double x : s->v)
      if (x < 0.0) throw ConfigError("w2_squared: densities must be nonnegative");
  const auto cf = DiscreteCdf::from_density(f);
  const auto cg = DiscreteCdf::from_density(g);
  std::vector<double> grid;
  grid.reserve(cf.p.size() + cg.p.size());
  std::merge(cf.p.begin(), cf.p.end(), cg.p.begin(), cg.p.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double acc = 0.0;
  double prev_p = grid.front();
  double prev_d2 = std::pow(cf.inverse(prev_p) - cg.inverse(prev_p), 2);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double d = cf.inverse(grid[k]) - cg.inverse(grid[k]);
    const double d2 = d * d;
    acc += 0.5 * (grid[k] - prev_p) * (prev_d2 + d2);
    prev_p = grid[k];
    prev_d2 = d2;
  }
  return acc;
}

double wasserstein_misfit(const SignedSeries& sim, const SignedSeries& data) {
  const auto [sp, sn] = split_signs(sim);
  const auto [dp, dn] = split_signs(data);
  auto pair_term = [](const SignedSeries& a, const SignedSeries& b) {
    const bool za = identically_zero(a), zb = identically_zero(b);
    if (za && zb) return 0.0;
    if (za || zb) return 1.0;
    return w2_squared(absolute(a), absolute(b));
  };
  return pair_term(sp, dp) + pair_term(sn, dn);
}

namespace {

struct Alignment {
  std::int64_t ratio;       // data dt / sim dt
  std::size_t first_sim;    // first simulation index with t >= 0
};

Alignment align(const Seismogram& sim, const TimeGrid& data) {
  const double r = data.dt / sim.grid.dt;
  const double rr = std::round(r);
  if (rr < 1.0 || std::abs(r - rr) > 1e-9 * r)
    throw ConfigError("qoi: observation times are not on the simulation grid");
  if (sim.grid.first > 0) throw ConfigError("qoi: simulation starts after t = 0");
  Alignment a{static_cast<std::int64_t>(rr), static_cast<std::size_t>(-sim.grid.first)};
  // Data must cover [0, end of simulation].
  const std::int64_t sim_last = sim.grid.first + static_cast<std::int64_t>(sim.grid.count) - 1;
  const std::int64_t data_first = data.first * a.ratio;
  const std::int64_t data_last = (data.first + static_cast<std::int64_t>(data.count) - 1) * a.ratio;
  if (data_first > 0 || data_last < sim_last)
    throw ConfigError("qoi: data do not cover the simulated interval [0, T]");
  return a;
}

}  // namespace

double qoi_e(const std::vector<Seismogram>& sim, const DataSet& data) {
  if (sim.size() != data.traces.size()) throw ConfigError("qoi_e: receiver count mismatch");
  if (sim.empty()) return 0.0;
  const auto& dg = data.grid();
  const auto al = align(sim.front(), dg);
  const double dt = sim.front().grid.dt;
  const double horizon = sim.front().grid.end();
  double total = 0.0;
  for (std::size_t r = 0; r < sim.size(); ++r) {
    for (int c = 0; c < 2; ++c) {
      const auto& u = sim[r].component(c);
      const auto& d = data.traces[r].component(c);
      double acc = 0.0, prev = 0.0;
      for (std::size_t j = al.first_sim; j < sim[r].grid.count; ++j) {
        // Position on the data grid: q / ratio data steps after data.first.
        const std::int64_t q = (sim[r].grid.first + static_cast<std::int64_t>(j)) - dg.first * al.ratio;
        const auto k = static_cast<std::size_t>(q / al.ratio);
        const std::int64_t rem = q % al.ratio;
        double dv = d[k];
        if (rem != 0) dv += (d[k + 1] - d[k]) * static_cast<double>(rem) / static_cast<double>(al.ratio);
        const double e = u[j] - dv;
        const double e2 = e * e;
        if (j > al.first_sim) acc += 0.5 * dt * (prev + e2);
        prev = e2;
      }
      total += acc;
    }
  }
  return total / horizon;
}

SignedSeries normalized_trace(const Seismogram& s, int component, double horizon) {
  SignedSeries out;
  const auto& v = s.component(component);
  for (std::size_t j = 0; j < s.grid.count; ++j) {
    const double t = s.grid.at(j);
    if (t < 0.0) continue;
    out.t.push_back(t / horizon);
    out.v.push_back(v[j]);
  }
  return out;
}

double qoi_w(const std::vector<Seismogram>& sim, const DataSet& data) {
  if (sim.size() != data.traces.size()) throw ConfigError("qoi_w: receiver count mismatch");
  if (sim.empty()) return 0.0;
  align(sim.front(), data.grid());
  const double horizon = sim.front().grid.end();
  double total = 0.0;
  for (std::size_t r = 0; r < sim.size(); ++r)
    for (int c = 0; c < 2; ++c)
      total += wasserstein_misfit(normalized_trace(sim[r], c, horizon),
                                  normalized_trace(data.traces[r], c, horizon));
  return total;
}

}  // namespace mlmcseis
