#pragma once

#include <Eigen/Dense>

#include "specdet/energy.hpp"
#include "specdet/spectra.hpp"

namespace specdet {

// Per-frequency signal-to-noise ratio Gamma(nu) of a detection problem,
// sampled on a grid.  Cells may carry fractional weights (support
// boundaries); integrals are sum_i w_i f(gamma_i) * cell.
struct SnrSpectrum {
  Eigen::VectorXd gamma;
  Eigen::VectorXd weights;
  double cell = 0.0;

  template <typename F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < gamma.size(); ++i) acc += weights[i] * f(gamma[i]);
    return acc * cell;
  }
};

SnrSpectrum snr_spectrum_const(double gamma, std::int64_t nodes = 1);

// Centralized detector: Gamma = phi / sigma_v^2 over the whole band.
SnrSpectrum snr_spectrum_cd(const SpectralDensity& psd, double sigma_v2, const FrequencyGrid& grid);

// Decentralized MAC detector: Gamma = xi phi / (xi sigma_v^2 + sigma_w^2);
// nodes with no allocated energy contribute nothing.
SnrSpectrum snr_spectrum_dd(const SpectralDensity& psd, const EnergyProfile& profile,
                            double sigma_v2, double sigma_w2);

// Threshold range of the normalised log-likelihood ratio: its almost-sure
// limits under H1 (m1 > 0) and H0 (m0 < 0).
double m0(const SnrSpectrum& s);
double m1(const SnrSpectrum& s);

// Tilt solving tau + int log(1+Gamma) = int Gamma / (1 - t Gamma); requires
// m0 < tau < m1, where the root lies in (-1, 0).  Roots within 1e-9 of an
// endpoint snap to it.
double solve_tstar(const SnrSpectrum& s, double tau);

// Large deviation exponents of the false-alarm and miss probabilities of the
// threshold test at level tau.  Zero on the degenerate side of the threshold
// range; related by kappa_fa - kappa_m = tau inside it.
double kappa_fa(const SnrSpectrum& s, double tau);
double kappa_m(const SnrSpectrum& s, double tau);

// Miss exponent of the Neyman-Pearson test at any fixed false-alarm level.
double kappa_m_alpha(const SnrSpectrum& s);

enum class Hypothesis { H0, H1 };

// Limiting scaled log-moment generating function of the LLR statistic.
double lmgf(const SnrSpectrum& s, double t, Hypothesis h);

struct AssumptionReport {
  bool log_integrable = false;      // int |log h_i| finite for both hypotheses
  bool ratio_bounded = false;       // ess sup of h0/h1 and h1/h0 finite
  double abs_log_integral_h0 = 0.0;
  double abs_log_integral_h1 = 0.0;
  double sup_ratio_01 = 0.0;
  double sup_ratio_10 = 0.0;
  std::int64_t worst_node = -1;     // first offending node, -1 if none
  bool ok() const { return log_integrable && ratio_bounded; }
};

// Checks the spectral regularity assumptions on the per-hypothesis spectra.
AssumptionReport check_assumptions(const Eigen::VectorXd& h0, const Eigen::VectorXd& h1, double cell);

// Per-hypothesis observation spectra feeding check_assumptions.
std::pair<Eigen::VectorXd, Eigen::VectorXd> hypothesis_spectra_cd(const SpectralDensity& psd,
                                                                  double sigma_v2,
                                                                  const FrequencyGrid& grid);
std::pair<Eigen::VectorXd, Eigen::VectorXd> hypothesis_spectra_dd(const SpectralDensity& psd,
                                                                  const EnergyProfile& profile,
                                                                  double sigma_v2, double sigma_w2);

}  // namespace specdet
