#include "mlmc_seis/solver.hpp"

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include <time.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

Level Level::make(const Hierarchy& hier, int index) {
  if (index < 0) throw ConfigError("level index must be >= 0");
  const double scale = std::ldexp(1.0, -index);
  return {index, hier.h0 * scale, hier.dt0 * scale};
}

void SourceSpec::validate() const {
  if (!(f0 > 0.0)) throw ConfigError("source: f0 must be > 0");
  if (!(t0 < t_c && t_c < horizon)) throw ConfigError("source: need t0 < t_c < horizon");
  if (!(d_s > 0.0)) throw ConfigError("source: depth must be > 0");
}

void Geometry::validate() const {
  if (receiver_offsets.empty()) throw ConfigError("geometry: need at least one receiver");
  if (!(pad_x > 0.0 && pad_z > 0.0)) throw ConfigError("geometry: pads must be > 0");
  if (receiver_depth < 0.0) throw ConfigError("geometry: receiver depth must be >= 0");
}

double gaussian_stf(double t, double f0, double t_c) {
  const double dt = t - t_c;
  return 3.0 * f0 / std::sqrt(2.0 * std::numbers::pi) * std::exp(-4.5 * f0 * f0 * dt * dt);
}

double required_padding(const UncertaintySpec& unc, const LayeredMedium& medium, double horizon,
                        double f0) {
  const double v = max_vp(medium, unc);
  return v * std::max(horizon, 0.0) / 2.0 + v / f0;
}

Domain make_domain(const SourceSpec& source, const Geometry& geom, const Hierarchy& hier) {
  source.validate();
  geom.validate();
  double x_min = source.x_s, x_max = source.x_s;
  for (double off : geom.receiver_offsets) {
    x_min = std::min(x_min, source.x_s + off);
    x_max = std::max(x_max, source.x_s + off);
  }
  const double z_max = std::max(source.d_s, geom.receiver_depth);
  const double h = hier.h0;
  Domain d;
  d.x_left = std::floor((x_min - geom.pad_x) / h) * h;
  const double x_right = std::ceil((x_max + geom.pad_x) / h) * h;
  d.width = x_right - d.x_left;
  d.depth = std::ceil((z_max + geom.pad_z) / h) * h;
  d.cells_x0 = static_cast<int>(std::lround(d.width / h));
  d.cells_z0 = static_cast<int>(std::lround(d.depth / h));
  return d;
}

namespace {

std::int64_t exact_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, std::abs(r)))
    throw ConfigError(std::string(what) + " is not an integer multiple of the time step");
  return static_cast<std::int64_t>(n);
}

}  // namespace

TimeGrid simulation_grid(const SourceSpec& source, const Level& level) {
  const auto first = exact_ratio(source.t0, level.dt, "t0");
  const auto last = exact_ratio(source.horizon, level.dt, "horizon");
  return {first, level.dt, static_cast<std::size_t>(last - first + 1)};
}

long long cell_count(const Domain& domain, const Level& level) { return domain.cells(level.index); }

std::size_t step_count(const SourceSpec& source, const Level& level) {
  return simulation_grid(source, level).count - 1;
}

void check_stability(const Level& level, double vp_max, double c_cfl) {
  const double bound = c_cfl * level.h / vp_max;
  if (level.dt > bound * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "CFL violation at level " << level.index << ": dt=" << level.dt << " > " << bound
        << " (h=" << level.h << ", vp_max=" << vp_max << ")";
    throw SolverFailure(msg.str());
  }
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

namespace {

// Row-major 2-D array, x fastest.
template <typename T>
struct Grid2 {
  int nx = 0;
  int nz = 0;
  std::vector<T> v;

  Grid2() = default;
  Grid2(int nx_, int nz_) : nx(nx_), nz(nz_), v(static_cast<std::size_t>(nx_) * nz_, T(0)) {}
  T* row(int j) { return v.data() + static_cast<std::size_t>(j) * nx; }
  const T* row(int j) const { return v.data() + static_cast<std::size_t>(j) * nx; }
  T& at(int i, int j) { return v[static_cast<std::size_t>(j) * nx + i]; }
  T at(int i, int j) const { return v[static_cast<std::size_t>(j) * nx + i]; }
};
using Field = Grid2<double>;
// Memory variables only carry the O(1/Q) relaxation correction; single
// precision halves their share of the memory traffic.
using MemoryField = Grid2<float>;

struct Stencil {
  std::vector<std::pair<std::size_t, double>> taps;  // flat index, weight
};

// Bilinear weights of point (x, z) on a grid whose node (i, j) sits at
// (x_off + i h, z_off + j h), clipped to the valid index range.
Stencil bilinear(double x, double z, double x_off, double z_off, double h, int nx, int nz) {
  const double fx = (x - x_off) / h;
  const double fz = (z - z_off) / h;
  int i = static_cast<int>(std::floor(fx));
  int j = static_cast<int>(std::floor(fz));
  i = std::clamp(i, 0, nx - 2);
  j = std::clamp(j, 0, nz - 2);
  const double ax = fx - i;
  const double az = fz - j;
  Stencil s;
  auto push = [&](int ii, int jj, double w) {
    if (w != 0.0) s.taps.emplace_back(static_cast<std::size_t>(jj) * nx + ii, w);
  };
  push(i, j, (1 - ax) * (1 - az));
  push(i + 1, j, ax * (1 - az));
  push(i, j + 1, (1 - ax) * az);
  push(i + 1, j + 1, ax * az);
  return s;
}

// Per-step damping factors exp(-dt alpha(d)), alpha quadratic in the depth d
// into the sponge.
std::vector<double> sponge_profile(int n, double offset, double h, double length, double width,
                                   double alpha, double dt, bool left, bool right) {
  std::vector<double> g(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n; ++i) {
    const double x = offset + i * h;
    double d = 0.0;
    if (left) d = std::max(d, width - x);
    if (right) d = std::max(d, x - (length - width));
    if (d > 0.0) {
      const double r = std::min(d / width, 1.0);
      g[static_cast<std::size_t>(i)] = std::exp(-dt * alpha * r * r);
    }
  }
  return g;
}

// Crank-Nicolson step of the memory variables of one row:
// e <- a e + c sdot, and relax accumulates the midpoint value of e.
void relax_update(float* __restrict e, const double* __restrict sdot, double* __restrict relax,
                  int n, double a, double c) {
  for (int i = 0; i < n; ++i) {
    const double old = e[i];
    const double next = a * old + c * sdot[i];
    relax[i] += 0.5 * (old + next);
    e[i] = static_cast<float>(next);
  }
}

// Wave fields decay through the subnormal range ahead of every wavefront;
// subnormal arithmetic is two orders of magnitude slower on common CPUs and
// those values are physically irrelevant, so they are flushed to zero for
// the duration of a solve.
class FlushSubnormals {
 public:
  FlushSubnormals() {
#if defined(__SSE__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040);  // FTZ | DAZ
#endif
  }
  ~FlushSubnormals() {
#if defined(__SSE__)
    _mm_setcsr(saved_);
#endif
  }
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;

 private:
  unsigned saved_ = 0;
};

struct LayerModuli {
  double rho, lam, mu;
};

}  // namespace

std::vector<Seismogram> simulate(const MaterialSample& sample, const LayeredMedium& medium,
                                 const SourceSpec& source, const Geometry& geom,
                                 const Level& level, const SolverOptions& options) {
  return simulate(sample, medium, source, geom, level, options, nullptr);
}

std::vector<Seismogram> simulate(const MaterialSample& sample, const LayeredMedium& medium,
                                 const SourceSpec& source, const Geometry& geom,
                                 const Level& level, const SolverOptions& options, EnergyProbe* probe) {
  const FlushSubnormals ftz;
  const auto& hier = options.hierarchy;
  const Domain dom = make_domain(source, geom, hier);
  const double h = level.h;
  const double dt = level.dt;
  const int nx = dom.cells_x0 << level.index;  // cells
  const int nz = dom.cells_z0 << level.index;
  if (sample.size() != medium.size()) throw ConfigError("simulate: sample/medium size mismatch");

  // Relaxation model per distinct Q.
  const int nmech = options.attenuation ? options.sls_mechanisms : 0;
  std::map<double, SlsCoefficients> sls_by_q;
  const std::pair<double, double> band{source.f0 / 10.0, source.f0 * 10.0};
  if (nmech > 0)
    for (const auto& l : medium.layers())
      if (!sls_by_q.count(l.q_factor))
        sls_by_q.emplace(l.q_factor, fit_sls(l.q_factor, nmech, band, source.f0));
  std::vector<double> omega(static_cast<std::size_t>(nmech), 0.0);
  if (nmech > 0) omega = sls_by_q.begin()->second.omega;  // same band for all layers

  // Per-layer unrelaxed moduli.
  std::vector<LayerModuli> layer_mod(medium.size());
  std::vector<std::vector<double>> layer_weight(medium.size());
  double vp_max = 0.0;
  for (std::size_t k = 0; k < medium.size(); ++k) {
    double scale = 1.0;
    if (nmech > 0) {
      const auto& sls = sls_by_q.at(medium.layers()[k].q_factor);
      scale = sls.unrelaxed_scale;
      layer_weight[k] = sls.weight;
    }
    const double rho = sample.rho[k];
    const double mu = rho * sample.vs[k] * sample.vs[k] * scale;
    const double p = rho * sample.vp[k] * sample.vp[k] * scale;
    layer_mod[k] = {rho, p - 2.0 * mu, mu};
    vp_max = std::max(vp_max, sample.vp[k] * std::sqrt(scale));
  }
  check_stability(level, vp_max, hier.c_cfl);

  // Depth profiles: "full" rows at z = j h, "half" rows at z = (j + 1/2) h.
  // Each row carries the effective medium of the depth interval of its
  // cell: arithmetic density, harmonic shear modulus and the Backus
  // (transversely isotropic) normal-stress coefficients.  Interfaces that do
  // not fall on a grid row then keep second-order accuracy.
  auto cell_average = [&](double lo, double hi, auto&& f) {
    lo = std::max(lo, 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < medium.size(); ++k) {
      const double top = medium.top_of(k);
      const double bottom = k + 1 < medium.size() ? medium.top_of(k + 1)
                                                  : std::numeric_limits<double>::infinity();
      const double overlap = std::min(hi, bottom) - std::max(lo, top);
      if (overlap > 0.0) acc += overlap * f(layer_mod[k]);
    }
    return acc / (hi - lo);
  };
  std::vector<double> buoy_full(nz + 1), buoy_half(nz), c11(nz + 1), c13(nz + 1), c33(nz + 1),
      c11_surface(1), mu_half(nz);
  std::vector<std::size_t> layer_full(nz + 1), layer_half(nz);
  for (int j = 0; j <= nz; ++j) {
    const double lo = std::max(0.0, (j - 0.5) * h), hi = (j + 0.5) * h;
    layer_full[j] = medium.layer_index(j * h);
    buoy_full[j] = 1.0 / cell_average(lo, hi, [](const LayerModuli& m) { return m.rho; });
    const double inv_p =
        cell_average(lo, hi, [](const LayerModuli& m) { return 1.0 / (m.lam + 2.0 * m.mu); });
    const double ratio = cell_average(
        lo, hi, [](const LayerModuli& m) { return m.lam / (m.lam + 2.0 * m.mu); });
    const double plate = cell_average(lo, hi, [](const LayerModuli& m) {
      const double p = m.lam + 2.0 * m.mu;
      return p - m.lam * m.lam / p;
    });
    c33[j] = 1.0 / inv_p;
    c13[j] = ratio * c33[j];
    c11[j] = plate + ratio * ratio * c33[j];
    if (j == 0) c11_surface[0] = plate;  // c11 - c13^2 / c33: szz = 0 at the surface
  }
  for (int j = 0; j < nz; ++j) {
    const double lo = j * h, hi = (j + 1) * h;
    layer_half[j] = medium.layer_index((j + 0.5) * h);
    buoy_half[j] = 1.0 / cell_average(lo, hi, [](const LayerModuli& m) { return m.rho; });
    mu_half[j] = 1.0 / cell_average(lo, hi, [](const LayerModuli& m) { return 1.0 / m.mu; });
  }

  // Sponge on left, right and bottom.
  const double width_x = dom.width, depth = dom.depth;
  const auto gx_full = sponge_profile(nx + 1, 0.0, h, width_x, options.sponge_width,
                                      options.sponge_alpha, dt, true, true);
  const auto gx_half = sponge_profile(nx, 0.5 * h, h, width_x, options.sponge_width,
                                      options.sponge_alpha, dt, true, true);
  const auto gz_full = sponge_profile(nz + 1, 0.0, h, depth, options.sponge_width,
                                      options.sponge_alpha, dt, false, true);
  const auto gz_half = sponge_profile(nz, 0.5 * h, h, depth, options.sponge_width,
                                      options.sponge_alpha, dt, false, true);

  Field vx(nx + 1, nz + 1), vz(nx, nz), sxx(nx, nz + 1), szz(nx, nz + 1), sxz(nx + 1, nz);
  std::vector<MemoryField> rxx, rzz, rxz;  // memory variables: rates of the relaxation stresses
  for (int b = 0; b < nmech; ++b) {
    rxx.emplace_back(nx, nz + 1);
    rzz.emplace_back(nx, nz + 1);
    rxz.emplace_back(nx + 1, nz);
  }
  // Crank-Nicolson coefficients of eta' = -w (eta - Y sdot).
  std::vector<double> cn_a(nmech), cn_b(nmech);
  for (int b = 0; b < nmech; ++b) {
    const double w = omega[b] * dt;
    cn_a[b] = (1.0 - 0.5 * w) / (1.0 + 0.5 * w);
    cn_b[b] = w / (1.0 + 0.5 * w);
  }
  std::vector<std::vector<double>> weight_full(nmech, std::vector<double>(nz + 1)),
      weight_half(nmech, std::vector<double>(nz));
  for (int b = 0; b < nmech; ++b) {
    for (int j = 0; j <= nz; ++j) weight_full[b][j] = layer_weight[layer_full[j]][b];
    for (int j = 0; j < nz; ++j) weight_half[b][j] = layer_weight[layer_half[j]][b];
  }

  // Source stencils in grid coordinates (x measured from the left edge).
  const double xs = source.x_s - dom.x_left;
  const double zs = source.d_s;
  const Stencil src_normal = bilinear(xs, zs, 0.5 * h, 0.0, h, nx, nz + 1);
  const Stencil src_shear = bilinear(xs, zs, 0.0, 0.5 * h, h, nx + 1, nz);
  const double inv_area = 1.0 / (h * h);

  // Receivers.
  struct Receiver {
    Stencil vx;
    // vz interpolation: weights on rows (j, j+1) of vz, possibly with the
    // free-surface ghost row (j = -1).
    int i0 = 0, j0 = 0;
    double ax = 0.0, az = 0.0;
    double x = 0.0;
  };
  std::vector<Receiver> recs;
  for (double off : geom.receiver_offsets) {
    Receiver r;
    r.x = source.x_s + off - dom.x_left;
    const double zr = geom.receiver_depth;
    r.vx = bilinear(r.x, zr, 0.0, 0.0, h, nx + 1, nz + 1);
    const double fx = r.x / h - 0.5, fz = zr / h - 0.5;
    r.i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, nx - 2);
    r.j0 = std::clamp(static_cast<int>(std::floor(fz)), -1, nz - 2);
    r.ax = fx - r.i0;
    r.az = fz - r.j0;
    recs.push_back(r);
  }

  auto vz_node = [&](int i, int j) -> double {
    if (j >= 0) return vz.at(i, j);
    // Ghost row above the free surface from szz = 0:
    // dz vz = -lam / (lam + 2 mu) dx vx.
    const double c = c13[0] / c33[0];
    return vz.at(i, 0) + c * (vx.at(i + 1, 0) - vx.at(i, 0));
  };
  auto sample_vz = [&](const Receiver& r) {
    const double a = r.ax, c = r.az;
    return (1 - a) * (1 - c) * vz_node(r.i0, r.j0) + a * (1 - c) * vz_node(r.i0 + 1, r.j0) +
           (1 - a) * c * vz_node(r.i0, r.j0 + 1) + a * c * vz_node(r.i0 + 1, r.j0 + 1);
  };

  const TimeGrid grid = simulation_grid(source, level);
  std::vector<Seismogram> out(recs.size());
  for (std::size_t r = 0; r < recs.size(); ++r) {
    out[r].receiver = static_cast<int>(r) + 1;
    out[r].grid = grid;
    out[r].ux.assign(grid.count, 0.0);
    out[r].uz.assign(grid.count, 0.0);
  }

  // Energy box in cell indices: source and receivers, free surface to the deepest point.
  double box_x0 = source.x_s, box_x1 = source.x_s;
  for (double off : geom.receiver_offsets) {
    box_x0 = std::min(box_x0, source.x_s + off);
    box_x1 = std::max(box_x1, source.x_s + off);
  }
  const int bi0 = std::clamp(static_cast<int>(std::floor((box_x0 - dom.x_left) / h)), 0, nx - 1);
  const int bi1 = std::clamp(static_cast<int>(std::ceil((box_x1 - dom.x_left) / h)), bi0 + 1, nx);
  const int bj1 = std::clamp(static_cast<int>(std::ceil(std::max(source.d_s, geom.receiver_depth) / h)), 1, nz);
  auto box_energy = [&]() {
    double e = 0.0;
    for (int j = 0; j < bj1; ++j) {
      const double det = c11[j] * c33[j] - c13[j] * c13[j];
      for (int i = bi0; i < bi1; ++i) {
        e += 0.5 * (vx.at(i, j) * vx.at(i, j) / buoy_full[j] + vz.at(i, j) * vz.at(i, j) / buoy_half[j]);
        const double a = sxx.at(i, j), c = szz.at(i, j), s = sxz.at(i, j);
        if (j == 0) e += 0.5 * a * a / c11_surface[0];
        else e += 0.5 * (c33[j] * a * a - 2.0 * c13[j] * a * c + c11[j] * c * c) / det;
        e += 0.5 * s * s / mu_half[j];
      }
    }
    return e * h * h;
  };

  const double dth = dt / h;
  const double inv_h = 1.0 / h;
  const bool any_source = source.moment[0] != 0.0 || source.moment[1] != 0.0 || source.moment[2] != 0.0;
  std::vector<double> sdot_xx(nx), sdot_zz(nx), sdot_xz(nx + 1);
  std::vector<double> relax_xx(nx), relax_zz(nx), relax_xz(nx + 1);

  // One step: velocities to t_{n+1/2}, then stresses to t_{n+1}.  The two
  // sweeps are fused row by row (velocity row j+1 ahead of stress row j) so
  // every field row streams through the cache once per step.
  auto velocity_row = [&](int j) {
    double* vxr = vx.row(j);
    const double* sxxr = sxx.row(j);
    const double* sxzr = sxz.row(j);
    const double* sxzu = j > 0 ? sxz.row(j - 1) : nullptr;
    const double bj = buoy_full[j] * dth;
    const double gz = gz_full[j];
    if (j == 0) {
      for (int i = 1; i < nx; ++i) {
        const double div = (sxxr[i] - sxxr[i - 1]) + 2.0 * sxzr[i];
        vxr[i] = gz * gx_full[i] * (vxr[i] + bj * div);
      }
    } else {
      for (int i = 1; i < nx; ++i) {
        const double div = (sxxr[i] - sxxr[i - 1]) + (sxzr[i] - sxzu[i]);
        vxr[i] = gz * gx_full[i] * (vxr[i] + bj * div);
      }
    }
    double* vzr = vz.row(j);
    const double* szzr = szz.row(j);
    const double* szzd = szz.row(j + 1);
    const double bh = buoy_half[j] * dth;
    const double gzh = gz_half[j];
    for (int i = 0; i < nx; ++i) {
      const double div = (sxzr[i + 1] - sxzr[i]) + (szzd[i] - szzr[i]);
      vzr[i] = gzh * gx_half[i] * (vzr[i] + bh * div);
    }
  };
  auto stress_row = [&](int j) {
    const double* vxr = vx.row(j);
    const double* vzr = vz.row(j);
    const double* vzu = j > 0 ? vz.row(j - 1) : nullptr;
    const double a11 = c11[j], a13 = c13[j], a33 = c33[j];
    if (j == 0) {
      const double p_fs = c11_surface[0];
      for (int i = 0; i < nx; ++i) {
        sdot_xx[i] = p_fs * (vxr[i + 1] - vxr[i]) * inv_h;
        sdot_zz[i] = 0.0;
      }
    } else {
      for (int i = 0; i < nx; ++i) {
        const double exx = (vxr[i + 1] - vxr[i]) * inv_h;
        const double ezz = (vzr[i] - vzu[i]) * inv_h;
        sdot_xx[i] = a11 * exx + a13 * ezz;
        sdot_zz[i] = a13 * exx + a33 * ezz;
      }
    }
    double* sxxr = sxx.row(j);
    double* szzr = szz.row(j);
    const double gz = gz_full[j];
    if (nmech == 0) {
      for (int i = 0; i < nx; ++i) {
        const double g = gz * gx_half[i];
        sxxr[i] = g * (sxxr[i] + dt * sdot_xx[i]);
        szzr[i] = g * (szzr[i] + dt * sdot_zz[i]);
      }
    } else {
      std::fill(relax_xx.begin(), relax_xx.end(), 0.0);
      std::fill(relax_zz.begin(), relax_zz.end(), 0.0);
      for (int b = 0; b < nmech; ++b) {
        const double c = cn_b[b] * weight_full[b][j];
        relax_update(rxx[b].row(j), sdot_xx.data(), relax_xx.data(), nx, cn_a[b], c);
        if (j > 0) relax_update(rzz[b].row(j), sdot_zz.data(), relax_zz.data(), nx, cn_a[b], c);
      }
      for (int i = 0; i < nx; ++i) {
        const double g = gz * gx_half[i];
        sxxr[i] = g * (sxxr[i] + dt * (sdot_xx[i] - relax_xx[i]));
        szzr[i] = g * (szzr[i] + dt * (sdot_zz[i] - relax_zz[i]));
      }
    }

    const double* vxd = vx.row(j + 1);
    const double muh = mu_half[j];
    for (int i = 1; i < nx; ++i)
      sdot_xz[i] = muh * ((vxd[i] - vxr[i]) + (vzr[i] - vzr[i - 1])) * inv_h;
    double* sxzr = sxz.row(j);
    const double gzh = gz_half[j];
    if (nmech == 0) {
      for (int i = 1; i < nx; ++i) sxzr[i] = gzh * gx_full[i] * (sxzr[i] + dt * sdot_xz[i]);
    } else {
      std::fill(relax_xz.begin(), relax_xz.end(), 0.0);
      for (int b = 0; b < nmech; ++b)
        relax_update(rxz[b].row(j) + 1, sdot_xz.data() + 1, relax_xz.data() + 1, nx - 1, cn_a[b],
                     cn_b[b] * weight_half[b][j]);
      for (int i = 1; i < nx; ++i)
        sxzr[i] = gzh * gx_full[i] * (sxzr[i] + dt * (sdot_xz[i] - relax_xz[i]));
    }
  };

  // Highest rows touched by the receivers (velocities) and the source (stresses).
  int rec_row = 0;
  for (const auto& r : recs) {
    for (const auto& tap : r.vx.taps) rec_row = std::max(rec_row, static_cast<int>(tap.first / (nx + 1)));
    rec_row = std::max(rec_row, r.j0 + 1);
  }
  rec_row = std::min(rec_row, nz - 1);
  int src_row = 0;
  for (const auto& tap : src_normal.taps) src_row = std::max(src_row, static_cast<int>(tap.first / nx));
  for (const auto& tap : src_shear.taps) src_row = std::max(src_row, static_cast<int>(tap.first / (nx + 1)));
  src_row = std::min(src_row, nz - 1);

  // Receivers: u(t_{m+1}) = u(t_m) + dt v(t_{m+1/2}).
  auto record = [&](std::size_t m) {
    for (std::size_t r = 0; r < recs.size(); ++r) {
      double vxi = 0.0;
      for (const auto& [idx, w] : recs[r].vx.taps) vxi += w * vx.v[idx];
      const double vzi = sample_vz(recs[r]);
      out[r].ux[m + 1] = out[r].ux[m] + dt * vxi;
      out[r].uz[m + 1] = out[r].uz[m] + dt * vzi;
      if (!std::isfinite(out[r].ux[m + 1]) || !std::isfinite(out[r].uz[m + 1])) {
        std::ostringstream msg;
        msg << "non-finite wavefield at step " << m + 1 << " (level " << level.index << ")";
        throw SolverFailure(msg.str());
      }
    }
  };
  auto inject = [&](std::size_t m) {
    if (!any_source) return;
    // The moment history is M S(t), so the stress update over [t_m, t_m+1]
    // receives the exact increment M (S(t_m+1) - S(t_m)).
    const double t_m = static_cast<double>(grid.first + static_cast<std::int64_t>(m)) * dt;
    const double amp =
        (gaussian_stf(t_m + dt, source.f0, source.t_c) - gaussian_stf(t_m, source.f0, source.t_c)) * inv_area;
    for (const auto& [idx, w] : src_normal.taps) {
      sxx.v[idx] -= amp * w * source.moment[0];
      szz.v[idx] -= amp * w * source.moment[1];
    }
    for (const auto& [idx, w] : src_shear.taps) sxz.v[idx] -= amp * w * source.moment[2];
    // Keep the traction-free surface exact.
    for (int i = 0; i < nx; ++i) szz.row(0)[i] = 0.0;
  };

  // Temporal blocking: `depth` consecutive steps advance together as a
  // wavefront over the rows, step k trailing step k-1 by three rows, so each
  // row is loaded from memory once per block instead of once per step.  The
  // arithmetic per grid point is unchanged, so results do not depend on the
  // block depth.
  constexpr int kBlockDepth = 4;
  const std::size_t steps = grid.count - 1;
  for (std::size_t n = 0; n < steps;) {
    const int depth = probe ? 1 : static_cast<int>(std::min<std::size_t>(kBlockDepth, steps - n));
    for (int wave = -1; wave < nz + 3 * (depth - 1); ++wave) {
      for (int k = 0; k < depth; ++k) {
        const int v_row = wave - 3 * k + 1;
        if (v_row >= 0 && v_row < nz) {
          velocity_row(v_row);
          if (v_row == rec_row) record(n + static_cast<std::size_t>(k));
        }
        const int s_row = wave - 3 * k;
        if (s_row >= 0 && s_row < nz) {
          stress_row(s_row);
          if (s_row == src_row) inject(n + static_cast<std::size_t>(k));
        }
      }
    }
    n += static_cast<std::size_t>(depth);

    if (probe && n % static_cast<std::size_t>(std::max(probe->every, 1)) == 0) {
      probe->times.push_back(grid.at(n));
      probe->energy.push_back(box_energy());
    }
    if ((n >> 8) != ((n - static_cast<std::size_t>(depth)) >> 8)) {
      for (double v : vz.v)
        if (!std::isfinite(v)) {
          std::ostringstream msg;
          msg << "non-finite wavefield by step " << n << " (level " << level.index << ")";
          throw SolverFailure(msg.str());
        }
    }
  }
  return out;
}

void write_seismograms(std::ostream& out, const std::vector<Seismogram>& seis) {
  out << "t";
  for (const auto& s : seis) out << ", ux_r" << s.receiver << ", uz_r" << s.receiver;
  out << '\n';
  if (seis.empty()) return;
  const auto& grid = seis.front().grid;
  char buf[64];
  for (std::size_t j = 0; j < grid.count; ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", grid.at(j));
    out << buf;
    for (const auto& s : seis) {
      std::snprintf(buf, sizeof buf, ", %.17g", s.ux[j]);
      out << buf;
      std::snprintf(buf, sizeof buf, ", %.17g", s.uz[j]);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<Seismogram> read_seismograms(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("seismogram file: missing header");
  std::vector<int> ids;
  {
    std::istringstream hs(line);
    std::string tok;
    int col = 0;
    while (std::getline(hs, tok, ',')) {
      tok.erase(0, tok.find_first_not_of(' '));
      if (col > 0 && col % 2 == 1) {
        if (tok.rfind("ux_r", 0) != 0) throw ConfigError("seismogram file: bad header " + tok);
        ids.push_back(std::stoi(tok.substr(4)));
      }
      ++col;
    }
  }
  std::vector<Seismogram> seis(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) seis[r].receiver = ids[r];
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != 1 + 2 * ids.size()) throw ConfigError("seismogram file: ragged row");
    times.push_back(row[0]);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      seis[r].ux.push_back(row[1 + 2 * r]);
      seis[r].uz.push_back(row[2 + 2 * r]);
    }
  }
  if (times.size() < 2) throw ConfigError("seismogram file: need at least two rows");
  TimeGrid grid;
  grid.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  grid.first = std::llround(times.front() / grid.dt);
  grid.count = times.size();
  for (auto& s : seis) s.grid = grid;
  return seis;
}

}  // namespace mlmcseis
