#include "specdet/energy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace specdet {

double energy_budget(const SpectralDensity& psd, double Et, double sigma_v2) {
  if (Et <= 0.0) throw std::invalid_argument("energy_budget: Et must be positive");
  if (sigma_v2 < 0.0) throw std::invalid_argument("energy_budget: sigma_v2 must be nonnegative");
  return Et / (psd.variance() + sigma_v2);
}

namespace {

EnergyProfile make_profile(ProfileKind kind, const FrequencyGrid& grid, Eigen::VectorXd xi,
                           Eigen::VectorXd weights, double budget) {
  EnergyProfile p;
  p.kind = kind;
  p.grid = grid;
  p.xi = std::move(xi);
  p.weights = std::move(weights);
  p.budget = budget;
  double measure = 0.0;
  for (Eigen::Index i = 0; i < p.xi.size(); ++i)
    if (p.xi[i] > 0.0) measure += p.weights[i];
  p.beta_star = measure * grid.cell_measure();
  return p;
}

}  // namespace

EnergyProfile profile_cep(const SpectralDensity& psd, double Et, double sigma_v2,
                          const FrequencyGrid& grid, const ModeSet* support) {
  const double c = energy_budget(psd, Et, sigma_v2);
  const auto n = grid.size();
  Eigen::VectorXd xi(n);
  if (support == nullptr) {
    xi.setConstant(c);
  } else {
    if (!(support->grid == grid)) throw std::invalid_argument("profile_cep: support grid mismatch");
    if (support->beta_actual <= 0.0) throw std::invalid_argument("profile_cep: empty support");
    xi.setZero();
    for (auto k : support->ordered) xi[k] = c / support->beta_actual;
  }
  return make_profile(ProfileKind::Cep, grid, std::move(xi), Eigen::VectorXd::Ones(n), c);
}

EnergyProfile profile_sep(const SpectralDensity& psd, double Et, double sigma_v2,
                          const FrequencyGrid& grid, const ModeSet* support) {
  const double c = energy_budget(psd, Et, sigma_v2);
  const Eigen::VectorXd phi = psd.sample(grid);
  const auto n = grid.size();
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  double mass = 0.0;
  if (support == nullptr) {
    mass = phi.sum() * grid.cell_measure();
  } else {
    if (!(support->grid == grid)) throw std::invalid_argument("profile_sep: support grid mismatch");
    for (auto k : support->ordered) mass += phi[k];
    mass *= grid.cell_measure();
  }
  if (!(mass > 0.0)) throw std::invalid_argument("profile_sep: PSD mass on the support is zero");
  const double scale = c / mass;
  if (support == nullptr) {
    xi = scale * phi;
  } else {
    for (auto k : support->ordered) xi[k] = scale * phi[k];
  }
  return make_profile(ProfileKind::Sep, grid, std::move(xi), Eigen::VectorXd::Ones(n), c);
}

EnergyProfile profile_onoff(const SpectralDensity& psd, double Et, double sigma_v2,
                            const ModeSet& support) {
  const double c = energy_budget(psd, Et, sigma_v2);
  if (support.beta_actual <= 0.0) throw std::invalid_argument("profile_onoff: empty support");
  const auto n = support.grid.size();
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  for (auto k : support.ordered) xi[k] = c / support.beta_actual;
  return make_profile(ProfileKind::OnOff, support.grid, std::move(xi), Eigen::VectorXd::Ones(n), c);
}

EnergyProfile profile_onoff(const SpectralDensity& psd, double Et, double sigma_v2,
                            const EnergyProfile& like) {
  const double c = energy_budget(psd, Et, sigma_v2);
  if (like.beta_star <= 0.0) throw std::invalid_argument("profile_onoff: empty support");
  const auto n = like.grid.size();
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  const double level = c / like.beta_star;
  for (Eigen::Index i = 0; i < n; ++i)
    if (like.xi[i] > 0.0) {
      xi[i] = level;
      w[i] = like.weights[i];
    }
  return make_profile(ProfileKind::OnOff, like.grid, std::move(xi), std::move(w), c);
}

CubicRoots oep_cubic_roots(double phi, double lambda, double sigma_v2, double sigma_w2) {
  if (!(lambda > 0.0)) throw std::invalid_argument("oep_cubic_roots: lambda must be positive");
  if (!(sigma_v2 > 0.0) || !(sigma_w2 > 0.0))
    throw std::invalid_argument("oep_cubic_roots: noise powers must be positive");
  if (phi < 0.0) throw std::invalid_argument("oep_cubic_roots: phi must be nonnegative");

  const double s = phi + sigma_v2;
  const double a3 = lambda * sigma_v2 * s * s;
  const double a2 = lambda * sigma_w2 * (phi * phi + 4.0 * phi * sigma_v2 + 3.0 * sigma_v2 * sigma_v2);
  const double a1 = sigma_w2 * (lambda * sigma_w2 * (2.0 * phi + 3.0 * sigma_v2) - phi * phi);
  const double a0 = lambda * sigma_w2 * sigma_w2 * sigma_w2;

  // Monic depressed form t^3 + p t + q, x = t - a2 / (3 a3).
  const double b2 = a2 / a3, b1 = a1 / a3, b0 = a0 / a3;
  const double shift = b2 / 3.0;
  const double p = b1 - b2 * b2 / 3.0;
  const double q = b0 - b2 * b1 / 3.0 + 2.0 * b2 * b2 * b2 / 27.0;

  CubicRoots roots;
  const double disc = -4.0 * p * p * p - 27.0 * q * q;
  if (disc > 0.0) {
    // Three distinct real roots: trigonometric form.
    const double m = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg);
    for (int k = 0; k < 3; ++k)
      roots.r[roots.count++] = m * std::cos((theta - 2.0 * M_PI * k) / 3.0) - shift;
  } else {
    // One real root (a double root collapses here too): Cardano.
    const double half_q = q / 2.0;
    const double rad = std::sqrt(std::max(0.0, half_q * half_q + p * p * p / 27.0));
    const double u = std::cbrt(-half_q + rad);
    const double v = std::cbrt(-half_q - rad);
    roots.r[roots.count++] = u + v - shift;
    if (disc == 0.0 && (p != 0.0 || q != 0.0)) roots.r[roots.count++] = -(u + v) / 2.0 - shift;
  }

  // Newton polish against the original coefficients.
  for (int i = 0; i < roots.count; ++i) {
    double x = roots.r[i];
    for (int it = 0; it < 3; ++it) {
      const double f = ((a3 * x + a2) * x + a1) * x + a0;
      const double df = (3.0 * a3 * x + 2.0 * a2) * x + a1;
      if (df == 0.0) break;
      const double step = f / df;
      x -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    roots.r[i] = x;
  }
  std::sort(roots.r, roots.r + roots.count);
  return roots;
}

double oep_marginal_gain(double xi, double phi, double sigma_v2, double sigma_w2) {
  const double u = xi * sigma_v2 + sigma_w2;
  const double r = xi * (phi + sigma_v2) + sigma_w2;
  return phi * phi * sigma_w2 * xi / (u * r * r);
}

KktCertificate kkt_certify(const EnergyProfile& profile, double lambda,
                           const SpectralDensity& psd, double sigma_v2, double sigma_w2,
                           double tol_stationarity, double tol_budget) {
  const Eigen::VectorXd phi = psd.sample(profile.grid);
  KktCertificate cert;
  cert.lambda = lambda;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const double g = oep_marginal_gain(profile.xi[i], phi[i], sigma_v2, sigma_w2);
    if (profile.xi[i] > 0.0)
      cert.c4_violation = std::max(cert.c4_violation, std::abs(lambda - g));
    else
      cert.c3_violation = std::max(cert.c3_violation, g - lambda);
  }
  cert.c3_violation = std::max(cert.c3_violation, 0.0);
  const double c = profile.budget;
  cert.budget_residual = c > 0.0 ? std::abs(profile.total() - c) / c : std::abs(profile.total());
  cert.c3_ok = cert.c3_violation <= tol_stationarity;
  cert.c4_ok = cert.c4_violation <= tol_stationarity;
  cert.c5_ok = lambda >= 0.0;
  cert.c6_ok = lambda <= 1e-12 || cert.budget_residual <= tol_budget;
  return cert;
}

namespace {

// Allocation at one node for a given multiplier: the largest positive
// stationary point, or zero when none exists. The marginal gain is strictly
// unimodal on xi > 0, so the closed-form cubic is avoided here: near the
// support boundary its positive root pair coalesces and the closed form can
// fabricate a root past the tangency. Bisection on the decaying branch is
// exact in that regime and returns a clean zero once the peak drops below
// the multiplier.
double node_allocation(double phi, double lambda, double sv2, double sw2) {
  if (phi <= 0.0) return 0.0;
  const double s = phi + sv2;
  const double peak = sw2 * (std::sqrt(1.0 + 8.0 * sv2 / s) - 1.0) / (4.0 * sv2);
  const auto gain = [&](double xi) { return oep_marginal_gain(xi, phi, sv2, sw2); };
  if (gain(peak) < lambda) return 0.0;
  double lo = peak, hi = 2.0 * peak;
  int guard = 0;
  while (gain(hi) >= lambda) {
    hi *= 2.0;
    if (++guard > 2000) throw std::runtime_error("node_allocation: failed to bracket the root");
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gain(mid) >= lambda ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

OepSolution solve_oep(const SpectralDensity& psd, double beta, double Et, double sigma_v2,
                      double sigma_w2, const FrequencyGrid& grid) {
  if (!(sigma_v2 > 0.0) || !(sigma_w2 > 0.0))
    throw std::invalid_argument("solve_oep: noise powers must be positive");
  const double c = energy_budget(psd, Et, sigma_v2);
  ModeSet domain = transmitted_modes(psd, beta, grid);
  if (domain.ordered.empty()) throw std::invalid_argument("solve_oep: admissible band is empty");

  const Eigen::VectorXd phi = psd.sample(grid);
  bool any_positive = false;
  for (auto k : domain.ordered) any_positive |= phi[k] > 0.0;
  if (!any_positive) throw std::invalid_argument("solve_oep: PSD vanishes on the admissible band");

  const double cell = grid.cell_measure();
  auto spend = [&](double lambda, Eigen::VectorXd* out) {
    double total = 0.0;
    if (out) out->setZero();
    for (auto k : domain.ordered) {
      const double xi = node_allocation(phi[k], lambda, sigma_v2, sigma_w2);
      total += xi;
      if (out) (*out)[k] = xi;
    }
    return total * cell;
  };

  // Bracket the multiplier: spending decreases as lambda grows.
  double lo = 1e-12, hi = 1e6;
  int guard = 0;
  while (spend(lo, nullptr) < c) {
    lo /= 16.0;
    if (++guard > 200) throw std::runtime_error("solve_oep: failed to bracket the multiplier from below");
  }
  guard = 0;
  while (spend(hi, nullptr) > c) {
    hi *= 16.0;
    if (++guard > 200) throw std::runtime_error("solve_oep: failed to bracket the multiplier from above");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (spend(mid, nullptr) >= c ? lo : hi) = mid;
  }

  const auto n = grid.size();
  Eigen::VectorXd xi_lo(n), xi_hi(n);
  const double e_lo = spend(lo, &xi_lo);
  const double e_hi = spend(hi, &xi_hi);

  Eigen::VectorXd xi = xi_hi;
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(n);
  double lambda_star = hi;
  if (std::abs(e_hi - c) > 1e-9 * c) {
    // The support boundary fell inside a grid cell (or a tied level set of
    // cells): give the cells that switch on across the final bracket the
    // fractional measure that meets the budget exactly.
    double capacity = 0.0;
    for (auto k : domain.ordered)
      if (xi_lo[k] > 0.0 && xi_hi[k] == 0.0) capacity += xi_lo[k] * cell;
    if (capacity > 0.0) {
      const double theta = std::clamp((c - e_hi) / capacity, 0.0, 1.0);
      for (auto k : domain.ordered)
        if (xi_lo[k] > 0.0 && xi_hi[k] == 0.0) {
          xi[k] = xi_lo[k];
          weights[k] = theta;
        }
      lambda_star = lo;
    } else if (std::abs(e_lo - c) < std::abs(e_hi - c)) {
      xi = xi_lo;
      lambda_star = lo;
    }
  }

  OepSolution sol;
  sol.profile = make_profile(ProfileKind::Oep, grid, std::move(xi), std::move(weights), c);
  sol.lambda_star = lambda_star;
  sol.certificate = kkt_certify(sol.profile, lambda_star, psd, sigma_v2, sigma_w2);
  sol.domain = std::move(domain);
  return sol;
}

}  // namespace specdet
