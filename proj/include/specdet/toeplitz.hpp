#pragma once

#include <Eigen/Dense>
#include <functional>

#include "specdet/spectra.hpp"

namespace specdet {

// Weak (normalised Frobenius) norm: |A| = sqrt(n^-1 sum |a_ij|^2).
template <typename Derived>
double weak_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm() / std::sqrt(static_cast<double>(a.rows()));
}

// Spectral norm of a Hermitian matrix.
double strong_norm(const Eigen::MatrixXcd& a);

// Weak-norm distance |A - B|; the vehicle of asymptotic equivalence.
double equivalence_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Hermitian eigendecomposition with eigenvalues in descending order.
// Within a numerically repeated eigenvalue, eigenvectors are ordered by the
// index of the dominant DFT component so repeated decompositions agree.
struct EigenSystem {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXcd vectors; // columns match values
};

EigenSystem eigensystem(const Eigen::MatrixXcd& hermitian);

// Circulant approximant of the order-n covariance: eigenvalues are exactly
// the PSD samples phi((i-1)/n), eigenvectors the DFT columns.
CovarianceMatrix circulant_from_samples(const SpectralDensity& psd, int n);

struct DistributionCheck {
  double finite_average = 0.0;  // n^-1 sum F(lambda_k)
  double limit_integral = 0.0;  // int F(phi(nu)) dnu
  double gap = 0.0;             // |finite_average - limit_integral|
};

// Szego-style eigenvalue distribution comparison for a continuous F.
DistributionCheck toeplitz_distribution_check(const SpectralDensity& psd,
                                              const std::function<double(double)>& F, int n,
                                              const FrequencyGrid& grid = FrequencyGrid::default_for(1));

}  // namespace specdet
