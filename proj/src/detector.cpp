#include "specdet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace specdet {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::int64_t lattice_size(const std::vector<int>& lattice) {
  std::int64_t n = 1;
  for (int d : lattice) {
    if (d < 1) throw std::invalid_argument("precoder: lattice sizes must be positive");
    n *= d;
  }
  return n;
}

// Frequency of lattice bin k (row-major unwinding): nu_l = i_l / n_l.
Eigen::VectorXd bin_frequency(std::int64_t k, const std::vector<int>& lattice) {
  Eigen::VectorXd nu(lattice.size());
  for (int d = static_cast<int>(lattice.size()) - 1; d >= 0; --d) {
    nu[d] = static_cast<double>(k % lattice[d]) / lattice[d];
    k /= lattice[d];
  }
  return nu;
}

// Lattice bins ordered by descending PSD sample, ties toward lower index.
std::vector<std::int64_t> bins_by_psd(const SpectralDensity& psd, const std::vector<int>& lattice,
                                      Eigen::VectorXd* phi_out) {
  const std::int64_t n = lattice_size(lattice);
  Eigen::VectorXd phi(n);
  for (std::int64_t k = 0; k < n; ++k) phi[k] = psd(bin_frequency(k, lattice));
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) { return phi[a] > phi[b]; });
  if (phi_out) *phi_out = std::move(phi);
  return order;
}

// Transmitted mode count: bandwidth occupation of the k-th mode level must
// stay within beta, and the degree-of-freedom fraction n'/n cannot exceed it.
Eigen::Index mode_count(const Eigen::VectorXd& levels_desc, const SpectralDensity& psd,
                        double beta, const FrequencyGrid& omega_grid) {
  const Eigen::VectorXd phi = psd.sample(omega_grid);
  const double cell = omega_grid.cell_measure();
  Eigen::Index count = 0;
  for (Eigen::Index k = 0; k < levels_desc.size(); ++k) {
    const double occ = static_cast<double>((phi.array() > levels_desc[k]).count()) * cell;
    if (occ <= beta)
      count = k + 1;
    else
      break;
  }
  const auto cap = static_cast<Eigen::Index>(std::floor(beta * levels_desc.size()));
  return std::min(count, cap);
}

void finish_precoder(Precoder& pre, const EnergyProfile& profile, double sigma_s2, double sigma_v2,
                     double p1) {
  const auto n = pre.n();
  // Average energy constraint: clamp the finite-n Riemann sum at the budget.
  const double c = profile.budget;
  const double used = pre.gains.squaredNorm() / static_cast<double>(n);
  if (used > c && used > 0.0) pre.gains *= std::sqrt(c / used);
  pre.per_node_energy.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Eigen::Index kp = 0; kp < pre.n_prime(); ++kp)
      acc += std::norm(pre.basis(k, kp)) * pre.gains[kp] * pre.gains[kp];
    pre.per_node_energy[k] = (p1 * sigma_s2 + sigma_v2) * acc;
  }
}

}  // namespace

Precoder build_pcs_precoder(const CovarianceMatrix& cov, const SpectralDensity& psd,
                            const std::vector<int>& lattice, double beta,
                            const EnergyProfile& profile, double sigma_v2,
                            const FrequencyGrid& omega_grid, double p1) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("build_pcs_precoder: beta in (0, 1]");
  const std::int64_t n = lattice_size(lattice);
  if (cov.m.rows() != n)
    throw std::invalid_argument("build_pcs_precoder: covariance does not match the lattice");
  const EigenSystem sys = eigensystem(cov.m);
  const Eigen::Index np = mode_count(sys.values, psd, beta, omega_grid);
  if (np < 1) throw std::invalid_argument("build_pcs_precoder: no transmittable mode under beta");

  Precoder pre;
  pre.strategy = Strategy::Pcs;
  pre.basis = sys.vectors.leftCols(np);
  pre.gains.resize(np);
  const std::vector<std::int64_t> order = bins_by_psd(psd, lattice, nullptr);
  pre.bins.assign(order.begin(), order.begin() + np);
  for (Eigen::Index k = 0; k < np; ++k)
    pre.gains[k] = std::sqrt(profile.value_at(bin_frequency(pre.bins[k], lattice)));
  finish_precoder(pre, profile, psd.variance(), sigma_v2, p1);
  return pre;
}

Precoder build_pfs_precoder(const SpectralDensity& psd, const std::vector<int>& lattice,
                            double beta, const EnergyProfile& profile, double sigma_v2,
                            const FrequencyGrid& omega_grid, double p1) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("build_pfs_precoder: beta in (0, 1]");
  const std::int64_t n = lattice_size(lattice);
  Eigen::VectorXd phi;
  const std::vector<std::int64_t> order = bins_by_psd(psd, lattice, &phi);
  Eigen::VectorXd levels(n);
  for (std::int64_t k = 0; k < n; ++k) levels[k] = phi[order[k]];
  const Eigen::Index np = mode_count(levels, psd, beta, omega_grid);
  if (np < 1) throw std::invalid_argument("build_pfs_precoder: no transmittable mode under beta");

  Precoder pre;
  pre.strategy = Strategy::Pfs;
  pre.bins.assign(order.begin(), order.begin() + np);
  pre.basis.resize(n, np);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index kp = 0; kp < np; ++kp) {
    const Eigen::VectorXd fb = bin_frequency(pre.bins[kp], lattice);
    for (std::int64_t k = 0; k < n; ++k) {
      const Eigen::VectorXd site = bin_frequency(k, lattice);
      double phase = 0.0;
      for (Eigen::Index d = 0; d < fb.size(); ++d)
        phase += fb[d] * site[d] * lattice[d];  // sum_l i_l b_l / n_l
      pre.basis(k, kp) = std::polar(scale, kTwoPi * phase);
    }
  }
  pre.gains.resize(np);
  for (Eigen::Index k = 0; k < np; ++k)
    pre.gains[k] = std::sqrt(profile.value_at(bin_frequency(pre.bins[k], lattice)));
  finish_precoder(pre, profile, psd.variance(), sigma_v2, p1);
  return pre;
}

Eigen::VectorXcd mac_observe(const Precoder& pre, const Eigen::VectorXcd& x,
                             const Eigen::VectorXcd& w) {
  if (x.size() != pre.n() || w.size() != pre.n_prime())
    throw std::invalid_argument("mac_observe: dimension mismatch");
  return pre.gains.asDiagonal() * (pre.basis.adjoint() * x) + w;
}

DdCovariances dd_covariances(const Precoder& pre, const CovarianceMatrix& cov, double sigma_v2,
                             double sigma_w2) {
  if (cov.m.rows() != pre.n()) throw std::invalid_argument("dd_covariances: dimension mismatch");
  if (!(sigma_w2 > 0.0)) throw std::invalid_argument("dd_covariances: sigma_w2 must be positive");
  const Eigen::MatrixXcd C = pre.matrix();
  const auto np = pre.n_prime();
  const Eigen::MatrixXcd gram = C.adjoint() * C;
  DdCovariances out;
  out.xi0 = sigma_v2 * gram + sigma_w2 * Eigen::MatrixXcd::Identity(np, np);
  out.xi1 = C.adjoint() * cov.m * C + out.xi0;
  out.xi0 = 0.5 * (out.xi0 + out.xi0.adjoint()).eval();
  out.xi1 = 0.5 * (out.xi1 + out.xi1.adjoint()).eval();
  Eigen::LLT<Eigen::MatrixXcd> chk0(out.xi0), chk1(out.xi1);
  if (chk0.info() != Eigen::Success || chk1.info() != Eigen::Success)
    throw std::runtime_error("dd_covariances: covariance is not positive definite");
  return out;
}

LlrEvaluator::LlrEvaluator(const Eigen::MatrixXcd& cov0, const Eigen::MatrixXcd& cov1, int norm_n)
    : llt0_(cov0), llt1_(cov1), norm_n_(norm_n) {
  if (cov0.rows() != cov0.cols() || cov1.rows() != cov1.cols() || cov0.rows() != cov1.rows())
    throw std::invalid_argument("LlrEvaluator: covariances must be square and commensurate");
  if (norm_n < 1) throw std::invalid_argument("LlrEvaluator: normalisation must be positive");
  if (llt0_.info() != Eigen::Success || llt1_.info() != Eigen::Success)
    throw std::runtime_error("LlrEvaluator: covariance is not positive definite");
  double ld = 0.0;
  for (Eigen::Index i = 0; i < cov0.rows(); ++i)
    ld += std::log(std::real(llt1_.matrixLLT()(i, i))) - std::log(std::real(llt0_.matrixLLT()(i, i)));
  log_det_ratio_ = 2.0 * ld;
}

double LlrEvaluator::operator()(const Eigen::VectorXcd& q) const {
  const double q0 = std::real(q.dot(llt0_.solve(q)));
  const double q1 = std::real(q.dot(llt1_.solve(q)));
  return (q0 - q1 - log_det_ratio_) / static_cast<double>(norm_n_);
}

LlrStatistic centralized_llr(const Eigen::VectorXcd& x, const Eigen::MatrixXcd& cov0,
                             const Eigen::MatrixXcd& cov1) {
  const int n = static_cast<int>(x.size());
  const LlrEvaluator eval(cov0, cov1, n);
  return {eval(x), n};
}

LlrStatistic decentralized_llr(const Eigen::VectorXcd& z, const DdCovariances& cov, int n_sensors) {
  const LlrEvaluator eval(cov.xi0, cov.xi1, n_sensors);
  return {eval(z), n_sensors};
}

}  // namespace specdet
