#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlmc_seis/medium.hpp"
#include "mlmc_seis/sls.hpp"

namespace mlmcseis {

// Bumped whenever a change to the discretization alters sample values; it
// enters the configuration digest so stale pools are rejected.
inline constexpr int kSchemeRevision = 3;

// Discretization of the coarsest level; level l halves both steps l times.
struct Hierarchy {
  double h0 = 1000.0;     // m
  double dt0 = 0.05;      // s
  double c_cfl = 0.45;    // dt <= c_cfl * h / vp_max
  int l_max = 3;
};

struct Level {
  int index = 0;
  double h = 0.0;
  double dt = 0.0;

  static Level make(const Hierarchy& hier, int index);
};

// Point source with a symmetric 2x2 moment tensor [[xx, xz], [xz, zz]] (N m).
struct SourceSpec {
  double x_s = 0.0;   // m, horizontal coordinate
  double d_s = 0.0;   // m, depth
  std::array<double, 3> moment{0.0, 0.0, 0.0};  // xx, zz, xz
  double f0 = 2.0;        // Hz
  double t_c = 0.0;       // s
  double t0 = -0.6;       // s
  double horizon = 25.0;  // s

  void validate() const;
};

struct Geometry {
  std::vector<double> receiver_offsets;  // m, signed, relative to x_s
  double receiver_depth = 0.0;           // m
  double pad_x = 0.0;                    // m
  double pad_z = 0.0;                    // m

  std::size_t receivers() const { return receiver_offsets.size(); }
  void validate() const;
};

// Uniform time grid t_j = (first + j) * dt, j = 0..count-1.  Integer offsets
// keep grids of different levels exactly nested.
struct TimeGrid {
  std::int64_t first = 0;
  double dt = 0.0;
  std::size_t count = 0;

  double at(std::size_t j) const { return static_cast<double>(first + static_cast<std::int64_t>(j)) * dt; }
  double start() const { return at(0); }
  double end() const { return at(count - 1); }
};

// Displacement at one receiver, components x and z (m).
struct Seismogram {
  int receiver = 0;
  TimeGrid grid;
  std::vector<double> ux;
  std::vector<double> uz;

  const std::vector<double>& component(int j) const { return j == 0 ? ux : uz; }
};

// Physical layout of the truncated half-plane.
struct Domain {
  double x_left = 0.0;  // m, coordinate of the left edge
  double width = 0.0;   // m
  double depth = 0.0;   // m
  int cells_x0 = 0;     // cells at level 0
  int cells_z0 = 0;

  long long cells(int level) const { return (static_cast<long long>(cells_x0) << level) * (static_cast<long long>(cells_z0) << level); }
};

struct SolverOptions {
  Hierarchy hierarchy;
  double sponge_width = 20000.0;  // m
  double sponge_alpha = 5.0;      // 1/s, damping rate at the outer edge
  int sls_mechanisms = 3;
  bool attenuation = true;
};

// Gaussian source-time function (3 f0 / sqrt(2 pi)) exp(-9 f0^2 (t - t_c)^2 / 2).
double gaussian_stf(double t, double f0, double t_c);

// Distance from the source/receiver box to the outer boundary such that a
// wave reflected there cannot reach a receiver before `horizon`:
// vp_max * horizon / 2 plus one wavelength vp_max / f0.
double required_padding(const UncertaintySpec& unc, const LayeredMedium& medium, double horizon,
                        double f0);

Domain make_domain(const SourceSpec& source, const Geometry& geom, const Hierarchy& hier);

TimeGrid simulation_grid(const SourceSpec& source, const Level& level);

// Cells and time steps of one solve at `level`.
long long cell_count(const Domain& domain, const Level& level);
std::size_t step_count(const SourceSpec& source, const Level& level);

// Throws SolverFailure when dt exceeds the CFL bound for `vp_max`.
void check_stability(const Level& level, double vp_max, double c_cfl);

// Forward solve of the 2-D P-SV system on a velocity-stress staggered grid,
// second order in space and time.  Deterministic and single-threaded.
std::vector<Seismogram> simulate(const MaterialSample& sample, const LayeredMedium& medium,
                                 const SourceSpec& source, const Geometry& geom,
                                 const Level& level, const SolverOptions& options);

// Discrete wave energy (kinetic plus elastic strain energy per unit length)
// inside the box spanned by the source and the receivers, recorded every
// `every` steps.  The strain term ignores memory variables.
struct EnergyProbe {
  int every = 10;
  std::vector<double> times;
  std::vector<double> energy;
};

std::vector<Seismogram> simulate(const MaterialSample& sample, const LayeredMedium& medium,
                                 const SourceSpec& source, const Geometry& geom,
                                 const Level& level, const SolverOptions& options, EnergyProbe* probe);

// Thread CPU seconds spent in `fn`.  One simulate call runs on one worker, so
// this equals wall time times the worker count of the call.
template <typename Fn>
double measure_work(Fn&& fn);

double thread_cpu_seconds();

template <typename Fn>
double measure_work(Fn&& fn) {
  const double start = thread_cpu_seconds();
  fn();
  return thread_cpu_seconds() - start;
}

// Columnar text: header `t, ux_r1, uz_r1, ...`, one row per time step.
void write_seismograms(std::ostream& out, const std::vector<Seismogram>& seis);
std::vector<Seismogram> read_seismograms(std::istream& in);

}  // namespace mlmcseis
