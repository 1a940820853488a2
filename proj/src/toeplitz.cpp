#include "specdet/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace specdet {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Index of the largest-magnitude DFT coefficient of v, computed directly.
int dominant_dft_bin(const Eigen::VectorXcd& v) {
  const auto n = v.size();
  int best = 0;
  double best_mag = -1.0;
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) acc += v[i] * std::polar(1.0, -kTwoPi * double(i) * double(k) / double(n));
    const double mag = std::abs(acc);
    if (mag > best_mag + 1e-12 * (1.0 + best_mag)) {
      best_mag = mag;
      best = k;
    }
  }
  return best;
}

}  // namespace

double strong_norm(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("strong_norm: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double equivalence_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("equivalence_gap: dimension mismatch");
  return weak_norm(a - b);
}

EigenSystem eigensystem(const Eigen::MatrixXcd& hermitian) {
  if (hermitian.rows() != hermitian.cols()) throw std::invalid_argument("eigensystem: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensystem: eigensolver failed to converge");
  const auto n = hermitian.rows();

  EigenSystem sys;
  sys.values.resize(n);
  sys.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    sys.values[k] = es.eigenvalues()[n - 1 - k];
    sys.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }

  // Canonical order inside numerically repeated eigenvalues.
  const double scale = std::max(1.0, sys.values.cwiseAbs().maxCoeff());
  const double tol = 1e-10 * scale;
  Eigen::Index lo = 0;
  while (lo < n) {
    Eigen::Index hi = lo + 1;
    while (hi < n && sys.values[lo] - sys.values[hi] <= tol) ++hi;
    if (hi - lo > 1) {
      std::vector<Eigen::Index> idx(hi - lo);
      std::iota(idx.begin(), idx.end(), lo);
      std::vector<int> bin(hi - lo);
      for (Eigen::Index k = lo; k < hi; ++k) bin[k - lo] = dominant_dft_bin(sys.vectors.col(k));
      std::stable_sort(idx.begin(), idx.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return bin[a - lo] < bin[b - lo]; });
      Eigen::MatrixXcd block(n, hi - lo);
      Eigen::VectorXd vals(hi - lo);
      for (Eigen::Index k = 0; k < hi - lo; ++k) {
        block.col(k) = sys.vectors.col(idx[k]);
        vals[k] = sys.values[idx[k]];
      }
      sys.vectors.middleCols(lo, hi - lo) = block;
      sys.values.segment(lo, hi - lo) = vals;
    }
    lo = hi;
  }
  return sys;
}

CovarianceMatrix circulant_from_samples(const SpectralDensity& psd, int n) {
  if (psd.dim() != 1) throw std::invalid_argument("circulant_from_samples: needs a 1-D PSD");
  if (n < 1) throw std::invalid_argument("circulant_from_samples: n must be positive");
  // First column c_i = n^-1 sum_k phi((k-1)/n) e^{+j 2 pi (k-1)(i-1)/n};
  // then B = F diag(phi samples) F^H exactly.
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < n; ++k) {
    const double phi = psd(static_cast<double>(k) / n);
    for (int i = 0; i < n; ++i)
      c[i] += phi * std::polar(1.0 / n, kTwoPi * double(k) * double(i) / double(n));
  }
  CovarianceMatrix cov;
  cov.structure = CovStructure::Circulant;
  cov.m.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov.m(i, j) = c[((i - j) % n + n) % n];
  return cov;
}

DistributionCheck toeplitz_distribution_check(const SpectralDensity& psd,
                                              const std::function<double(double)>& F, int n,
                                              const FrequencyGrid& grid) {
  const CovarianceMatrix cov = toeplitz_covariance(psd, n, grid);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov.m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("toeplitz_distribution_check: eigensolver failed to converge");
  DistributionCheck out;
  for (Eigen::Index k = 0; k < n; ++k) out.finite_average += F(es.eigenvalues()[k]);
  out.finite_average /= static_cast<double>(n);
  const Eigen::VectorXd s = psd.sample(grid);
  for (Eigen::Index i = 0; i < s.size(); ++i) out.limit_integral += F(s[i]);
  out.limit_integral *= grid.cell_measure();
  out.gap = std::abs(out.finite_average - out.limit_integral);
  return out;
}

}  // namespace specdet
