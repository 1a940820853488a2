#pragma once

#include <Eigen/Dense>

#include "specdet/energy.hpp"
#include "specdet/spectra.hpp"
#include "specdet/toeplitz.hpp"

namespace specdet {

enum class Strategy { Pcs, Pfs };

// Linear analog precoder C = V diag(gains): each of the n' channel uses
// forwards one spatial mode of the sensor field with its own amplitude.
struct Precoder {
  Strategy strategy = Strategy::Pcs;
  Eigen::MatrixXcd basis;            // n x n', orthonormal columns
  Eigen::VectorXd gains;             // n'
  Eigen::VectorXd per_node_energy;   // n
  std::vector<std::int64_t> bins;    // sensor-lattice bin paired with each mode

  Eigen::Index n() const { return basis.rows(); }
  Eigen::Index n_prime() const { return basis.cols(); }
  Eigen::MatrixXcd matrix() const { return basis * gains.asDiagonal(); }
};

// Principal-component precoder: forwards the n' leading eigenvectors of the
// process covariance.  The k-th mode draws its amplitude from the energy
// profile at the k-th strongest PSD bin of the sensor lattice.
Precoder build_pcs_precoder(const CovarianceMatrix& cov, const SpectralDensity& psd,
                            const std::vector<int>& lattice, double beta,
                            const EnergyProfile& profile, double sigma_v2,
                            const FrequencyGrid& omega_grid, double p1 = 1.0);

// Principal-frequency precoder: forwards the DFT columns at the n' strongest
// PSD bins of the sensor lattice.
Precoder build_pfs_precoder(const SpectralDensity& psd, const std::vector<int>& lattice,
                            double beta, const EnergyProfile& profile, double sigma_v2,
                            const FrequencyGrid& omega_grid, double p1 = 1.0);

// One channel use of the MAC: z = C^H x + w.
Eigen::VectorXcd mac_observe(const Precoder& pre, const Eigen::VectorXcd& x,
                             const Eigen::VectorXcd& w);

struct DdCovariances {
  Eigen::MatrixXcd xi0;  // C^H C sigma_v^2 + sigma_w^2 I
  Eigen::MatrixXcd xi1;  // C^H (Sigma + sigma_v^2 I) C + sigma_w^2 I
};

DdCovariances dd_covariances(const Precoder& pre, const CovarianceMatrix& cov, double sigma_v2,
                             double sigma_w2);

struct LlrStatistic {
  double value = 0.0;  // normalised by the sensor count
  int n = 0;
};

// Normalised Gaussian log-likelihood ratio via Cholesky factors of the two
// covariances; factorisations are reused across evaluations.
class LlrEvaluator {
 public:
  LlrEvaluator(const Eigen::MatrixXcd& cov0, const Eigen::MatrixXcd& cov1, int norm_n);
  double operator()(const Eigen::VectorXcd& q) const;
  int norm_n() const { return norm_n_; }

 private:
  Eigen::LLT<Eigen::MatrixXcd> llt0_, llt1_;
  double log_det_ratio_ = 0.0;  // log det cov1 - log det cov0
  int norm_n_ = 0;
};

LlrStatistic centralized_llr(const Eigen::VectorXcd& x, const Eigen::MatrixXcd& cov0,
                             const Eigen::MatrixXcd& cov1);
LlrStatistic decentralized_llr(const Eigen::VectorXcd& z, const DdCovariances& cov, int n_sensors);

}  // namespace specdet
