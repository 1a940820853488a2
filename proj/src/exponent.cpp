#include "specdet/exponent.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace specdet {

SnrSpectrum snr_spectrum_const(double gamma, std::int64_t nodes) {
  if (gamma < 0.0) throw std::invalid_argument("snr_spectrum_const: gamma must be nonnegative");
  SnrSpectrum s;
  s.gamma = Eigen::VectorXd::Constant(nodes, gamma);
  s.weights = Eigen::VectorXd::Ones(nodes);
  s.cell = 1.0 / static_cast<double>(nodes);
  return s;
}

SnrSpectrum snr_spectrum_cd(const SpectralDensity& psd, double sigma_v2, const FrequencyGrid& grid) {
  if (!(sigma_v2 > 0.0)) throw std::invalid_argument("snr_spectrum_cd: sigma_v2 must be positive");
  SnrSpectrum s;
  s.gamma = psd.sample(grid) / sigma_v2;
  s.weights = Eigen::VectorXd::Ones(grid.size());
  s.cell = grid.cell_measure();
  return s;
}

SnrSpectrum snr_spectrum_dd(const SpectralDensity& psd, const EnergyProfile& profile,
                            double sigma_v2, double sigma_w2) {
  if (!(sigma_w2 > 0.0)) throw std::invalid_argument("snr_spectrum_dd: sigma_w2 must be positive");
  if (sigma_v2 < 0.0) throw std::invalid_argument("snr_spectrum_dd: sigma_v2 must be nonnegative");
  const Eigen::VectorXd phi = psd.sample(profile.grid);
  SnrSpectrum s;
  s.gamma.resize(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    s.gamma[i] = profile.xi[i] * phi[i] / (profile.xi[i] * sigma_v2 + sigma_w2);
  s.weights = profile.weights;
  s.cell = profile.grid.cell_measure();
  return s;
}

double m0(const SnrSpectrum& s) {
  return s.integrate([](double g) { return g / (1.0 + g) - std::log1p(g); });
}

double m1(const SnrSpectrum& s) {
  return s.integrate([](double g) { return g - std::log1p(g); });
}

namespace {

// tau + int log(1+Gamma) - int Gamma / (1 - t Gamma), decreasing in t.
double tilt_residual(const SnrSpectrum& s, double tau, double t) {
  const double lhs = tau + s.integrate([](double g) { return std::log1p(g); });
  const double rhs = s.integrate([&](double g) { return g / (1.0 - t * g); });
  return lhs - rhs;
}

// Root of the tilt equation over an explicit bracket [lo, hi] with
// residual(lo) > 0 > residual(hi).
double tilt_bisect(const SnrSpectrum& s, double tau, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = tilt_residual(s, tau, mid);
    if (std::abs(r) <= 1e-14) return mid;
    (r > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gamma_max(const SnrSpectrum& s) {
  double g = 0.0;
  for (Eigen::Index i = 0; i < s.gamma.size(); ++i)
    if (s.weights[i] > 0.0) g = std::max(g, s.gamma[i]);
  return g;
}

// Tilt for any tau above m0; beyond m1 the root continues into [0, 1/Gmax).
double tilt_extended(const SnrSpectrum& s, double tau) {
  const double lo_lim = m0(s), hi_lim = m1(s);
  if (tau <= lo_lim || tau >= hi_lim) {
    if (tau >= hi_lim) {
      const double gmax = gamma_max(s);
      if (gmax <= 0.0) throw std::domain_error("tilt: degenerate SNR spectrum");
      double hi = (1.0 - 1e-12) / gmax;
      if (tilt_residual(s, tau, hi) > 0.0) return hi;
      return tilt_bisect(s, tau, 0.0, hi);
    }
    // tau <= m0: the root continues below -1.
    double lo = -2.0;
    int guard = 0;
    while (tilt_residual(s, tau, lo) < 0.0) {
      lo *= 2.0;
      if (++guard > 100) return -std::numeric_limits<double>::infinity();
    }
    return tilt_bisect(s, tau, lo, -1.0);
  }
  return tilt_bisect(s, tau, -1.0 + 1e-12, -1e-12);
}

double kappa_at(const SnrSpectrum& s, double tstar) {
  return s.integrate([&](double g) { return std::log1p(-tstar * g) + tstar * std::log1p(g); });
}

}  // namespace

double solve_tstar(const SnrSpectrum& s, double tau) {
  const double lo_lim = m0(s), hi_lim = m1(s);
  if (!(tau > lo_lim && tau < hi_lim)) {
    std::ostringstream os;
    os << "solve_tstar: tau = " << tau << " outside threshold range (" << lo_lim << ", " << hi_lim
       << ")";
    throw std::domain_error(os.str());
  }
  double t = tilt_bisect(s, tau, -1.0 + 1e-12, -1e-12);
  if (std::abs(t + 1.0) <= 1e-9) t = -1.0;
  if (std::abs(t) <= 1e-9) t = 0.0;
  return t;
}

double kappa_fa(const SnrSpectrum& s, double tau) {
  if (tau <= m0(s)) return 0.0;
  const double t = tilt_extended(s, tau);
  return kappa_at(s, t) + tau * (1.0 + t);
}

double kappa_m(const SnrSpectrum& s, double tau) {
  if (tau >= m1(s)) return 0.0;
  const double t = tilt_extended(s, tau);
  if (!std::isfinite(t)) return std::numeric_limits<double>::infinity();
  return kappa_at(s, t) + tau * t;
}

double kappa_m_alpha(const SnrSpectrum& s) {
  return s.integrate([](double g) { return 1.0 / (1.0 + g) + std::log1p(g) - 1.0; });
}

double lmgf(const SnrSpectrum& s, double t, Hypothesis h) {
  for (Eigen::Index i = 0; i < s.gamma.size(); ++i) {
    if (s.weights[i] <= 0.0) continue;
    const double g = s.gamma[i];
    const double arg = h == Hypothesis::H1 ? 1.0 - t * g : 1.0 - t * g / (1.0 + g);
    if (!(arg > 0.0)) {
      std::ostringstream os;
      os << "lmgf: t = " << t << " outside the domain at node " << i << " (argument " << arg << ")";
      throw std::domain_error(os.str());
    }
  }
  if (h == Hypothesis::H1)
    return -s.integrate([&](double g) { return std::log1p(-t * g) + t * std::log1p(g); });
  return -s.integrate([&](double g) { return std::log1p(-t * g / (1.0 + g)) + t * std::log1p(g); });
}

AssumptionReport check_assumptions(const Eigen::VectorXd& h0, const Eigen::VectorXd& h1, double cell) {
  if (h0.size() != h1.size()) throw std::invalid_argument("check_assumptions: size mismatch");
  AssumptionReport rep;
  rep.log_integrable = true;
  rep.ratio_bounded = true;
  for (Eigen::Index i = 0; i < h0.size(); ++i) {
    if (!(h0[i] > 0.0) || !(h1[i] > 0.0)) {
      rep.log_integrable = false;
      rep.ratio_bounded = false;
      if (rep.worst_node < 0) rep.worst_node = i;
      continue;
    }
    rep.abs_log_integral_h0 += std::abs(std::log(h0[i]));
    rep.abs_log_integral_h1 += std::abs(std::log(h1[i]));
    rep.sup_ratio_01 = std::max(rep.sup_ratio_01, h0[i] / h1[i]);
    rep.sup_ratio_10 = std::max(rep.sup_ratio_10, h1[i] / h0[i]);
  }
  rep.abs_log_integral_h0 *= cell;
  rep.abs_log_integral_h1 *= cell;
  return rep;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> hypothesis_spectra_cd(const SpectralDensity& psd,
                                                                  double sigma_v2,
                                                                  const FrequencyGrid& grid) {
  const Eigen::VectorXd phi = psd.sample(grid);
  Eigen::VectorXd h0 = Eigen::VectorXd::Constant(phi.size(), sigma_v2);
  Eigen::VectorXd h1 = phi.array() + sigma_v2;
  return {std::move(h0), std::move(h1)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> hypothesis_spectra_dd(const SpectralDensity& psd,
                                                                  const EnergyProfile& profile,
                                                                  double sigma_v2, double sigma_w2) {
  const Eigen::VectorXd phi = psd.sample(profile.grid);
  Eigen::VectorXd h0(phi.size()), h1(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    h0[i] = profile.xi[i] * sigma_v2 + sigma_w2;
    h1[i] = profile.xi[i] * (phi[i] + sigma_v2) + sigma_w2;
  }
  return {std::move(h0), std::move(h1)};
}

}  // namespace specdet
