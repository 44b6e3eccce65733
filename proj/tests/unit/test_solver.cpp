#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "mlmc_seis/error.hpp"
#include "mlmc_seis/solver.hpp"

using namespace mlmcseis;
using namespace mlmcseis::testing;

namespace {

// L2 norm over t >= 0 of the difference between two seismogram sets, sampled
// on the time grid of `coarse` (every grid of a finer level contains it).
double l2_difference(const std::vector<Seismogram>& coarse, const std::vector<Seismogram>& fine) {
  double acc = 0.0;
  for (std::size_t r = 0; r < coarse.size(); ++r) {
    const auto& c = coarse[r];
    const auto& f = fine[r];
    const auto stride = static_cast<std::size_t>(std::llround(c.grid.dt / f.grid.dt));
    for (std::size_t j = 0; j < c.grid.count; ++j) {
      if (c.grid.at(j) < 0.0) continue;
      const std::size_t k = static_cast<std::size_t>(
          (c.grid.first + static_cast<std::int64_t>(j)) * static_cast<std::int64_t>(stride) - f.grid.first);
      const double dx = c.ux[j] - f.ux[k], dz = c.uz[j] - f.uz[k];
      acc += (dx * dx + dz * dz) * c.grid.dt;
    }
  }
  return std::sqrt(acc);
}

double peak_amplitude(const std::vector<Seismogram>& s) {
  double m = 0.0;
  for (const auto& tr : s)
    for (std::size_t j = 0; j < tr.grid.count; ++j) m = std::max(m, std::hypot(tr.ux[j], tr.uz[j]));
  return m;
}

}  // namespace

TEST(GaussianStf, PeakValueSymmetryAndUnitMass) {
  EXPECT_NEAR(gaussian_stf(0.0, 2.0, 0.0), 6.0 / std::sqrt(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(gaussian_stf(0.0, 2.0, 0.0), 2.3937, 1e-4);
  for (double a : {0.01, 0.1, 0.37, 1.0})
    EXPECT_DOUBLE_EQ(gaussian_stf(0.3 + a, 1.5, 0.3), gaussian_stf(0.3 - a, 1.5, 0.3));
  double mass = 0.0;
  const double dt = 1e-4;
  for (double t = -5.0; t <= 5.0; t += dt) mass += gaussian_stf(t, 1.0, 0.0) * dt;
  EXPECT_NEAR(mass, 1.0, 1e-9);
}

TEST(RequiredPadding, MarginTravelTimeAndLinearity) {
  const auto m = rift_medium();
  const auto u = rift_uncertainty();
  const double vmax = max_vp(m, u);
  EXPECT_DOUBLE_EQ(required_padding(u, m, 0.0, 2.0), vmax / 2.0);
  double bound = 0.0;
  for (const auto& l : m.layers()) bound = std::max(bound, 0.5 * 25.0 * 1.1 * l.vs_bar * 1.78);
  EXPECT_GE(required_padding(u, m, 25.0, 2.0), bound);
  EXPECT_NEAR(required_padding(u, m, 50.0, 2.0) - required_padding(u, m, 25.0, 2.0), vmax * 25.0 / 2.0, 1e-6);
}

TEST(Levels, MeshArithmetic) {
  const auto s = small_setup();
  const auto& hier = s.options.hierarchy;
  const Domain dom = make_domain(s.source, s.geometry, hier);
  for (int l = 0; l < 5; ++l) {
    const auto a = Level::make(hier, l), b = Level::make(hier, l + 1);
    EXPECT_DOUBLE_EQ(a.h, hier.h0 / std::pow(2.0, l));
    EXPECT_DOUBLE_EQ(a.dt, hier.dt0 / std::pow(2.0, l));
    EXPECT_EQ(cell_count(dom, b), 4 * cell_count(dom, a));
    EXPECT_EQ(step_count(s.source, b), 2 * step_count(s.source, a));
  }
  const auto g = simulation_grid(s.source, Level::make(hier, 2));
  EXPECT_DOUBLE_EQ(g.start(), s.source.t0);
  EXPECT_DOUBLE_EQ(g.end(), s.source.horizon);
  EXPECT_DOUBLE_EQ(g.dt, hier.dt0 / 4.0);
}

TEST(Levels, StabilityBoundIsEnforced) {
  const Level lvl{0, 1000.0, 0.05};
  EXPECT_NO_THROW(check_stability(lvl, 9000.0, 0.45));
  EXPECT_THROW(check_stability(lvl, 9001.0, 0.45), SolverFailure);
}

TEST(Simulate, ZeroMomentGivesZeroSeismograms) {
  auto s = small_setup();
  s.source.moment = {0.0, 0.0, 0.0};
  for (const auto& tr : solve(s, nominal_material(s.medium), 1)) {
    for (double v : tr.ux) ASSERT_EQ(v, 0.0);
    for (double v : tr.uz) ASSERT_EQ(v, 0.0);
  }
}

TEST(Simulate, DeterministicAndOnTheLevelGrid) {
  const auto s = small_setup();
  const auto m = sample_material(s.medium, s.uncertainty, SampleKey{1, 1, 7});
  const auto a = solve(s, m, 1), b = solve(s, m, 1);
  ASSERT_EQ(a.size(), s.geometry.receivers());
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a[r].ux, b[r].ux);
    EXPECT_EQ(a[r].uz, b[r].uz);
    EXPECT_EQ(a[r].grid.count, a[0].grid.count);
    EXPECT_DOUBLE_EQ(a[r].grid.dt, 0.025);
    EXPECT_DOUBLE_EQ(a[r].grid.start(), -1.2);
    EXPECT_DOUBLE_EQ(a[r].grid.end(), 4.0);
  }
  EXPECT_GT(peak_amplitude(a), 0.0);
}

// Explosive source recorded several wavelengths away, where the propagating
// pulse (not the quasi-static near field) sets the peak amplitude.
TEST(Simulate, AttenuationLowersPeakAmplitude) {
  for (double q : {300.0, 100.0}) {
    WaveSetup s;
    s.medium = homogeneous_medium(2700.0, 3464.0, 6000.0, q);
    s.source.d_s = 2000.0;
    s.source.moment = {1e14, 1e14, 0.0};
    s.source.f0 = 2.0;
    s.source.t0 = -0.6;
    s.source.horizon = 6.0;
    s.geometry.receiver_offsets = {5000.0, 10000.0, 20000.0};
    s.geometry.pad_x = s.geometry.pad_z = 15000.0;
    s.options.hierarchy = Hierarchy{200.0, 0.0125, 0.45, 0};
    s.options.sponge_width = 8000.0;
    const auto m = nominal_material(s.medium);
    const auto on = solve(s, m, 0, true), off = solve(s, m, 0, false);
    for (std::size_t r = 0; r < on.size(); ++r)
      EXPECT_LT(peak_amplitude({on[r]}), peak_amplitude({off[r]})) << "Q = " << q << ", receiver " << r + 1;
  }
}

TEST(Simulate, BlowUpIsReportedWithStepIndex) {
  auto s = small_setup();
  s.options.hierarchy.c_cfl = 2.0;  // admits a time step beyond the true stability limit
  s.options.hierarchy.dt0 = 0.2;
  s.source.t0 = -1.2;
  s.source.horizon = 400.0;
  try {
    solve(s, nominal_material(s.medium), 0, false);
    FAIL() << "expected a solver failure";
  } catch (const SolverFailure& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Simulate, SecondOrderSelfConvergence) {
  const auto s = small_setup();
  const auto m = sample_material(s.medium, s.uncertainty, SampleKey{9, 0, 3});
  const auto ref = solve(s, m, 3);
  const double e0 = l2_difference(solve(s, m, 0), ref);
  const double e1 = l2_difference(solve(s, m, 1), ref);
  const double ratio = e0 / e1;
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 5.0);
}

// Homogeneous full-space P wave from an explosive line source: the far-field
// displacement is the moment rate (time derivative of the source-time
// function) convolved with the 2-D kernel H(t - tau) / sqrt(t^2 - tau^2).  The peak delay of that convolution relative
// to tau is removed from the measured peak time before comparing with the
// ray-theory travel time.
TEST(Simulate, DirectPArrivalMatchesRayTheory) {
  const double vp = 6000.0, vs = 6000.0 / std::sqrt(3.0), f0 = 2.0;
  WaveSetup s;
  s.medium = homogeneous_medium(2700.0, vs, vp);
  s.source.x_s = 0.0;
  s.source.d_s = 10000.0;
  s.source.moment = {1e14, 1e14, 0.0};
  s.source.f0 = f0;
  s.source.t0 = -0.6;
  s.source.horizon = 3.5;
  s.geometry.receiver_offsets = {10000.0};
  s.geometry.pad_x = s.geometry.pad_z = 15000.0;
  s.options.hierarchy = Hierarchy{125.0, 0.00625, 0.45, 0};
  s.options.sponge_width = 6000.0;
  const auto seis = solve(s, nominal_material(s.medium), 0, false);
  const auto& tr = seis[0];
  std::size_t jpk = 0;
  double apk = 0.0;
  for (std::size_t j = 0; j < tr.grid.count; ++j) {
    const double a = std::hypot(tr.ux[j], tr.uz[j]);
    if (a > apk) apk = a, jpk = j;
  }
  // Parabolic refinement of the sampled peak.
  double t_peak = tr.grid.at(jpk);
  if (jpk > 0 && jpk + 1 < tr.grid.count) {
    const double am = std::hypot(tr.ux[jpk - 1], tr.uz[jpk - 1]), ap = std::hypot(tr.ux[jpk + 1], tr.uz[jpk + 1]);
    t_peak += 0.5 * tr.grid.dt * (am - ap) / (am - 2.0 * apk + ap);
  }

  const double tau = std::sqrt(2.0) * 1e4 / vp;
  // conv(t) = int_0^inf S'(t - tau - w^2) 2 / sqrt(2 tau + w^2) dw.
  const double eps = 1e-6;
  auto rate = [&](double t) { return (gaussian_stf(t + eps, f0, 0.0) - gaussian_stf(t - eps, f0, 0.0)) / (2.0 * eps); };
  auto conv = [&](double t) {
    double acc = 0.0;
    const double dw = 1e-3;
    for (double w = 0.5 * dw; w < 3.0; w += dw) acc += rate(t - tau - w * w) * 2.0 / std::sqrt(2.0 * tau + w * w) * dw;
    return acc;
  };
  double best = 0.0, t_oracle = tau;
  for (double t = tau - 0.5; t < tau + 0.5; t += 1e-4) {
    const double c = std::abs(conv(t));
    if (c > best) best = c, t_oracle = t;
  }
  const double arrival = t_peak - (t_oracle - tau);
  EXPECT_NEAR(arrival, tau, 0.02 * tau) << "peak " << t_peak << " oracle peak " << t_oracle;
}

TEST(Simulate, ElasticEnergyNonIncreasingOnceTheSourceHasActed) {
  WaveSetup s;
  s.medium = homogeneous_medium(2700.0, 3500.0, 6000.0);
  s.source.x_s = 0.0;
  s.source.d_s = 4000.0;
  s.source.moment = {1e14, 1e14, 3e13};
  s.source.f0 = 1.0;
  s.source.t0 = -1.2;
  s.source.horizon = 6.0;
  s.geometry.receiver_offsets = {-4000.0, 4000.0};
  s.geometry.pad_x = s.geometry.pad_z = 20000.0;
  s.options.hierarchy = Hierarchy{250.0, 0.0125, 0.45, 0};
  s.options.sponge_width = 10000.0;
  s.options.attenuation = false;
  EnergyProbe probe;
  probe.every = 8;  // 0.1 s
  simulate(nominal_material(s.medium), s.medium, s.source, s.geometry, Level::make(s.options.hierarchy, 0),
           s.options, &probe);
  ASSERT_GT(probe.energy.size(), 10u);
  double peak = 0.0;
  for (double e : probe.energy) peak = std::max(peak, e);
  // The source pulse is over 6 standard deviations after t_c = 0.  What
  // remains in the box is the radiating field plus the permanent static
  // strain of the source.
  double settled = 0.0;
  for (std::size_t k = 1; k < probe.times.size(); ++k) {
    if (probe.times[k - 1] < 2.0) continue;
    if (settled == 0.0) settled = probe.energy[k - 1];
    EXPECT_LE(probe.energy[k], probe.energy[k - 1] + 1e-6 * peak) << "t = " << probe.times[k];
  }
  EXPECT_LT(probe.energy.back(), settled);
}

TEST(Seismograms, TextRoundTripIsExact) {
  const auto s = small_setup();
  const auto a = solve(s, nominal_material(s.medium), 0);
  std::stringstream io;
  write_seismograms(io, a);
  const std::string text = io.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t, ux_r1, uz_r1, ux_r2, uz_r2");
  const auto b = read_seismograms(io);
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a[r].ux, b[r].ux);
    EXPECT_EQ(a[r].uz, b[r].uz);
    EXPECT_EQ(a[r].grid.count, b[r].grid.count);
    EXPECT_EQ(a[r].grid.first, b[r].grid.first);
  }
}

TEST(MeasureWork, RepeatableAtOneLevel) {
  const auto s = small_setup();
  const auto m = nominal_material(s.medium);
  solve(s, m, 2);  // warm-up
  const double a = measure_work([&] { solve(s, m, 2); });
  const double b = measure_work([&] { solve(s, m, 2); });
  EXPECT_GT(a, 0.0);
  EXPECT_LT(std::abs(a - b) / std::min(a, b), 0.25);
}

TEST(Simulate, ResultsIndependentOfTemporalBlocking) {
  // An attached energy probe forces one step per sweep.
  const auto s = small_setup();
  const auto m = sample_material(s.medium, s.uncertainty, SampleKey{4, 2, 1});
  for (int level : {0, 1}) {
    EnergyProbe probe;
    probe.every = 1000000;
    const auto lvl = Level::make(s.options.hierarchy, level);
    const auto blocked = simulate(m, s.medium, s.source, s.geometry, lvl, s.options);
    const auto stepwise = simulate(m, s.medium, s.source, s.geometry, lvl, s.options, &probe);
    for (std::size_t r = 0; r < blocked.size(); ++r) {
      EXPECT_EQ(blocked[r].ux, stepwise[r].ux);
      EXPECT_EQ(blocked[r].uz, stepwise[r].uz);
    }
  }
}
