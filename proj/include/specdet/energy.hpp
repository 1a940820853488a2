#pragma once

#include <Eigen/Dense>

#include "specdet/spectra.hpp"

namespace specdet {

enum class ProfileKind { Cep, Sep, OnOff, Oep, Custom };

// Per-frequency transmit energy allocation xi(nu) >= 0 sampled on a grid.
// weights hold the fraction of each cell inside the support; every integral
// over the profile uses sum_i w_i f(xi_i) * cell.  budget is the average
// energy constraint c = E_t / (sigma_s^2 + sigma_v^2) the profile was built
// for, beta_star the (weighted) measure of {xi > 0}.
struct EnergyProfile {
  ProfileKind kind = ProfileKind::Custom;
  FrequencyGrid grid;
  Eigen::VectorXd xi;
  Eigen::VectorXd weights;
  double budget = 0.0;
  double beta_star = 0.0;

  double total() const { return (xi.array() * weights.array()).sum() * grid.cell_measure(); }
  double value_at(const Eigen::VectorXd& nu) const { return xi[grid.nearest(nu)]; }
};

double energy_budget(const SpectralDensity& psd, double Et, double sigma_v2);

// Constant allocation.  With a mode set the same budget is spent uniformly
// on the set alone; the default covers the whole band.
EnergyProfile profile_cep(const SpectralDensity& psd, double Et, double sigma_v2,
                          const FrequencyGrid& grid, const ModeSet* support = nullptr);

// PSD-shaped allocation xi proportional to phi, spending the full budget.
EnergyProfile profile_sep(const SpectralDensity& psd, double Et, double sigma_v2,
                          const FrequencyGrid& grid, const ModeSet* support = nullptr);

// Uniform allocation on a given support set.
EnergyProfile profile_onoff(const SpectralDensity& psd, double Et, double sigma_v2,
                            const ModeSet& support);
// Uniform allocation on the (possibly fractional) support of another profile.
EnergyProfile profile_onoff(const SpectralDensity& psd, double Et, double sigma_v2,
                            const EnergyProfile& like);

struct CubicRoots {
  int count = 0;
  double r[3] = {0.0, 0.0, 0.0};
};

// Real roots of the per-frequency stationarity cubic
//   a3 x^3 + a2 x^2 + a1 x + a0 = 0
// with a3 = l sv2 (phi+sv2)^2, a2 = l sw2 (phi^2 + 4 phi sv2 + 3 sv2^2),
// a1 = sw2 (l sw2 (2 phi + 3 sv2) - phi^2), a0 = l sw2^3, which is
// l u r^2 - phi^2 sw2 x with u = x sv2 + sw2, r = x (phi+sv2) + sw2.
CubicRoots oep_cubic_roots(double phi, double lambda, double sigma_v2, double sigma_w2);

// Marginal exponent gain d/dxi of the per-frequency miss exponent integrand.
double oep_marginal_gain(double xi, double phi, double sigma_v2, double sigma_w2);

struct KktCertificate {
  double lambda = 0.0;
  double c3_violation = 0.0;     // max over off-support nodes of I'(0) - lambda
  double c4_violation = 0.0;     // max over support of |lambda - I'(xi)|
  double budget_residual = 0.0;  // |total - budget| / budget
  bool c3_ok = false, c4_ok = false, c5_ok = false, c6_ok = false;
  bool all_ok() const { return c3_ok && c4_ok && c5_ok && c6_ok; }
};

KktCertificate kkt_certify(const EnergyProfile& profile, double lambda,
                           const SpectralDensity& psd, double sigma_v2, double sigma_w2,
                           double tol_stationarity = 1e-6, double tol_budget = 1e-8);

struct OepSolution {
  EnergyProfile profile;
  double lambda_star = 0.0;
  KktCertificate certificate;
  ModeSet domain;  // admissible band the support must stay inside
};

// Water-filling style optimal profile: per node the largest positive root of
// the stationarity cubic (zero when none), multiplier found by bisection on
// the budget.  A support boundary crossing a grid cell is handled by a
// fractional cell weight so the budget is met to high relative accuracy.
OepSolution solve_oep(const SpectralDensity& psd, double beta, double Et, double sigma_v2,
                      double sigma_w2, const FrequencyGrid& grid);

}  // namespace specdet
