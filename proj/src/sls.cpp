#include "mlmc_seis/sls.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> relative_modulus(const SlsCoefficients& sls, double omega) {
  std::complex<double> m(1.0, 0.0);
  for (std::size_t b = 0; b < sls.size(); ++b)
    m -= sls.weight[b] * sls.omega[b] / std::complex<double>(sls.omega[b], omega);
  return m;
}

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = std::sqrt(lo * hi);
    return v;
  }
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, double(k) / (n - 1));
  return v;
}

}  // namespace

bool SlsCoefficients::elastic() const {
  return std::all_of(weight.begin(), weight.end(), [](double y) { return y == 0.0; });
}

double modeled_q(const SlsCoefficients& sls, double omega) {
  const auto m = relative_modulus(sls, omega);
  // The sign of Im M depends on the Fourier convention; Q is positive.
  const double im = std::abs(m.imag());
  if (im == 0.0) return std::numeric_limits<double>::infinity();
  return m.real() / im;
}

SlsCoefficients fit_sls(double q_target, int mechanisms, std::pair<double, double> band_hz,
                        double f_ref_hz, double max_rel_error) {
  const auto [f_min, f_max] = band_hz;
  if (!(q_target > 0.0)) throw ConfigError("fit_sls: q_target must be > 0");
  if (mechanisms < 1) throw ConfigError("fit_sls: need at least one mechanism");
  if (!(f_min > 0.0 && f_min < f_max)) throw ConfigError("fit_sls: need 0 < f_min < f_max");

  SlsCoefficients sls;
  for (double f : log_space(f_min, f_max, mechanisms)) sls.omega.push_back(kTwoPi * f);
  sls.weight.assign(sls.omega.size(), 0.0);
  if (std::isinf(q_target)) return sls;

  const double inv_q = 1.0 / q_target;
  const auto fit_omegas = log_space(kTwoPi * f_min, kTwoPi * f_max, std::max(8 * mechanisms, 24));
  Eigen::MatrixXd a(static_cast<Eigen::Index>(fit_omegas.size()), mechanisms);
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(a.rows(), inv_q);
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double w = fit_omegas[static_cast<std::size_t>(k)];
    for (int b = 0; b < mechanisms; ++b) {
      const double wb = sls.omega[static_cast<std::size_t>(b)];
      const double den = wb * wb + w * w;
      a(k, b) = (wb * w + inv_q * wb * wb) / den;
    }
  }
  const Eigen::VectorXd y = a.colPivHouseholderQr().solve(rhs);
  for (int b = 0; b < mechanisms; ++b) sls.weight[static_cast<std::size_t>(b)] = std::max(0.0, y(b));

  const double ref = relative_modulus(sls, kTwoPi * f_ref_hz).real();
  sls.unrelaxed_scale = 1.0 / ref;

  const double err = band_error(sls, q_target, band_hz);
  if (err > max_rel_error) {
    std::ostringstream msg;
    msg << "fit_sls: band error " << err << " exceeds " << max_rel_error << " for Q=" << q_target
        << " with " << mechanisms << " mechanisms over [" << f_min << ", " << f_max
        << "] Hz (too few mechanisms or band too wide)";
    throw SolverFailure(msg.str());
  }
  return sls;
}

double band_error(const SlsCoefficients& sls, double q_target, std::pair<double, double> band_hz,
                  int points) {
  double worst = 0.0;
  for (double w : log_space(kTwoPi * band_hz.first, kTwoPi * band_hz.second, points))
    worst = std::max(worst, std::abs(modeled_q(sls, w) - q_target) / q_target);
  return worst;
}

}  // namespace mlmcseis
