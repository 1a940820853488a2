// Independent reference implementations used by the tests.  Everything here
// is deliberately slow and direct: long double Horner evaluation, plain
// Riemann sums, dense inverses, companion matrices.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "specdet/spectra.hpp"

namespace oracle {

inline long double arma_psd(const Eigen::VectorXd& b, const Eigen::VectorXd& a, double sigma_in2,
                            long double nu) {
  const long double two_pi = 6.283185307179586476925286766559L;
  const std::complex<long double> z = std::polar<long double>(1.0L, -two_pi * nu);
  std::complex<long double> bz = 0.0L, az = 0.0L;
  for (Eigen::Index k = b.size() - 1; k >= 0; --k) bz = bz * z + static_cast<long double>(b[k]);
  for (Eigen::Index k = a.size() - 1; k >= 0; --k) az = az * z + static_cast<long double>(a[k]);
  return static_cast<long double>(sigma_in2) * std::norm(bz) / std::norm(az);
}

// Fourier coefficient r_k = int_0^1 phi(nu) e^{+j 2 pi k nu} dnu by direct
// Riemann sum at an independent resolution.
inline std::complex<double> fourier_coeff(const specdet::SpectralDensity& psd, int lag,
                                          int resolution = 1 << 15) {
  const long double two_pi = 6.283185307179586476925286766559L;
  std::complex<long double> acc = 0.0L;
  for (int i = 0; i < resolution; ++i) {
    const long double nu = static_cast<long double>(i) / resolution;
    const long double v = psd(static_cast<double>(nu));
    acc += v * std::polar<long double>(1.0L, two_pi * lag * nu);
  }
  acc /= resolution;
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

// Real roots of a3 x^3 + a2 x^2 + a1 x + a0 via the companion matrix.
inline std::vector<double> companion_roots3(double a3, double a2, double a1, double a0) {
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  c(1, 0) = 1.0;
  c(2, 1) = 1.0;
  c(0, 2) = -a0 / a3;
  c(1, 2) = -a1 / a3;
  c(2, 2) = -a2 / a3;
  Eigen::EigenSolver<Eigen::Matrix3d> es(c);
  std::vector<double> roots;
  for (int i = 0; i < 3; ++i) {
    const std::complex<double> r = es.eigenvalues()[i];
    if (std::abs(r.imag()) <= 1e-8 * (1.0 + std::abs(r.real()))) roots.push_back(r.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Normalised Gaussian LLR through explicit inverses and determinants.
inline double explicit_llr(const Eigen::VectorXcd& q, const Eigen::MatrixXcd& cov0,
                           const Eigen::MatrixXcd& cov1, int n) {
  const Eigen::MatrixXcd inv0 = cov0.inverse();
  const Eigen::MatrixXcd inv1 = cov1.inverse();
  const double quad0 = (q.adjoint() * inv0 * q).value().real();
  const double quad1 = (q.adjoint() * inv1 * q).value().real();
  const double logdet = std::log(std::abs(cov1.determinant())) - std::log(std::abs(cov0.determinant()));
  return (quad0 - quad1 - logdet) / n;
}

// Empirical (1 - alpha) quantile, "higher" rule, by full sort.
inline double quantile_higher(std::vector<double> v, double alpha) {
  std::sort(v.begin(), v.end());
  const auto m = static_cast<std::int64_t>(v.size());
  auto idx = static_cast<std::int64_t>(std::ceil((1.0 - alpha) * static_cast<double>(m - 1)));
  idx = std::min(idx, m - 1);
  return v[static_cast<std::size_t>(idx)];
}

template <typename F>
double central_diff(F&& f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

// The two autoregressive moving-average spectra used throughout the tests,
// both normalised to unit process variance.  The first is a broad bandpass
// shape, the second concentrates almost all power near nu = 1/4.
inline specdet::SpectralDensity test_psd_broad() {
  Eigen::VectorXd b(5), a(5);
  b << 0.39, 0.0, -0.78, 0.0, 0.39;
  a << 1.0, 0.0, -0.37, 0.0, 0.19;
  return specdet::SpectralDensity::arma1d_normalized(b, a, 1.0);
}

inline specdet::SpectralDensity test_psd_peaked() {
  Eigen::VectorXd b(5), a(5);
  b << 3.0, 0.0, -6.0, 0.0, 3.0;
  a << 1.0, 0.0, 1.82, 0.0, 0.83;
  return specdet::SpectralDensity::arma1d_normalized(b, a, 1.0);
}

}  // namespace oracle
