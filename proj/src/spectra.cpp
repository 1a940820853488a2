#include "specdet/spectra.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace specdet {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Polynomial in z = e^{-j 2 pi nu} evaluated by Horner's rule.
std::complex<double> trig_poly(const Eigen::VectorXd& c, double nu) {
  const std::complex<double> z = std::polar(1.0, -kTwoPi * nu);
  std::complex<double> acc(0.0, 0.0);
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) acc = acc * z + c[k];
  return acc;
}

double integrate_samples(const Eigen::VectorXd& v, const FrequencyGrid& grid) {
  return v.sum() * grid.cell_measure();
}

}  // namespace

SpectralDensity SpectralDensity::arma1d(Eigen::VectorXd b, Eigen::VectorXd a, double sigma_in2) {
  if (b.size() == 0 || a.size() == 0) throw std::invalid_argument("arma1d: empty coefficient vector");
  if (a[0] == 0.0) throw std::invalid_argument("arma1d: leading AR coefficient must be nonzero");
  if (sigma_in2 <= 0.0) throw std::invalid_argument("arma1d: sigma_in2 must be positive");
  SpectralDensity psd;
  psd.kind_ = PsdKind::Arma1d;
  psd.dim_ = 1;
  psd.b_ = std::move(b);
  psd.a_ = std::move(a);
  psd.sigma_in2_ = sigma_in2;
  const FrequencyGrid grid = FrequencyGrid::default_for(1);
  // Wiener-class guard: the AR factor must stay away from zero on the circle.
  double amin = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < grid.size(); ++i)
    amin = std::min(amin, std::abs(trig_poly(psd.a_, grid.node(i)[0])));
  if (amin < 1e-6) {
    std::ostringstream os;
    os << "arma1d: AR polynomial nearly vanishes on the unit circle (min |A| = " << amin << ")";
    throw std::invalid_argument(os.str());
  }
  psd.variance_ = integrate_samples(psd.sample(grid), grid);
  return psd;
}

SpectralDensity SpectralDensity::arma1d_normalized(Eigen::VectorXd b, Eigen::VectorXd a,
                                                   double sigma_s2, const FrequencyGrid& grid) {
  const double s_in = normalize_input_power(b, a, sigma_s2, grid);
  return arma1d(std::move(b), std::move(a), s_in);
}

SpectralDensity SpectralDensity::pde2d(double a0, double ax, double ay, double sigma_q2) {
  if (sigma_q2 <= 0.0) throw std::invalid_argument("pde2d: sigma_q2 must be positive");
  SpectralDensity psd;
  psd.kind_ = PsdKind::Pde2d;
  psd.dim_ = 2;
  psd.a0_ = a0;
  psd.ax_ = ax;
  psd.ay_ = ay;
  psd.sigma_q2_ = sigma_q2;
  const FrequencyGrid grid = FrequencyGrid::default_for(2);
  double amin = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd nu = grid.node(i);
    const double sym = a0 + 2.0 * ax * std::cos(kTwoPi * nu[0]) + 2.0 * ay * std::cos(kTwoPi * nu[1]);
    amin = std::min(amin, std::abs(sym));
  }
  if (amin < 1e-6) {
    std::ostringstream os;
    os << "pde2d: operator symbol nearly vanishes (min |a| = " << amin
       << " for a0 = " << a0 << ", ax = " << ax << ", ay = " << ay << ")";
    throw std::invalid_argument(os.str());
  }
  psd.variance_ = integrate_samples(psd.sample(grid), grid);
  return psd;
}

SpectralDensity SpectralDensity::tabulated(const FrequencyGrid& grid, Eigen::VectorXd values) {
  if (values.size() != grid.size()) throw std::invalid_argument("tabulated: sample count does not match grid");
  if ((values.array() < 0.0).any()) throw std::invalid_argument("tabulated: PSD samples must be nonnegative");
  SpectralDensity psd;
  psd.kind_ = PsdKind::Tabulated;
  psd.dim_ = grid.dim;
  psd.tab_grid_ = grid;
  psd.tab_values_ = std::move(values);
  psd.variance_ = integrate_samples(psd.tab_values_, grid);
  return psd;
}

double SpectralDensity::operator()(const Eigen::VectorXd& nu) const {
  if (nu.size() != dim_) throw std::invalid_argument("SpectralDensity: frequency dimension mismatch");
  switch (kind_) {
    case PsdKind::Arma1d: {
      const double num = std::norm(trig_poly(b_, nu[0]));
      const double den = std::norm(trig_poly(a_, nu[0]));
      return sigma_in2_ * num / den;
    }
    case PsdKind::Pde2d: {
      const double sym =
          a0_ + 2.0 * ax_ * std::cos(kTwoPi * nu[0]) + 2.0 * ay_ * std::cos(kTwoPi * nu[1]);
      return sigma_q2_ / (sym * sym);
    }
    case PsdKind::Tabulated:
      return tab_values_[tab_grid_.nearest(nu)];
  }
  return 0.0;
}

double SpectralDensity::operator()(double nu) const {
  Eigen::VectorXd v(1);
  v[0] = nu;
  return (*this)(v);
}

Eigen::VectorXd SpectralDensity::sample(const FrequencyGrid& grid) const {
  if (grid.dim != dim_) throw std::invalid_argument("SpectralDensity::sample: grid dimension mismatch");
  Eigen::VectorXd out(grid.size());
  for (std::int64_t i = 0; i < grid.size(); ++i) out[i] = (*this)(grid.node(i));
  return out;
}

double normalize_input_power(const Eigen::VectorXd& b, const Eigen::VectorXd& a, double sigma_s2,
                             const FrequencyGrid& grid) {
  if (sigma_s2 <= 0.0) throw std::invalid_argument("normalize_input_power: sigma_s2 must be positive");
  double acc = 0.0;
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    const double nu = grid.node(i)[0];
    acc += std::norm(trig_poly(b, nu)) / std::norm(trig_poly(a, nu));
  }
  const double shape_power = acc * grid.cell_measure();
  if (!(shape_power > 0.0))
    throw std::invalid_argument("normalize_input_power: spectral shape integrates to zero");
  return sigma_s2 / shape_power;
}

double omega(const SpectralDensity& psd, double t, const FrequencyGrid& grid) {
  const Eigen::VectorXd v = psd.sample(grid);
  return static_cast<double>((v.array() > t).count()) * grid.cell_measure();
}

ModeSet transmitted_modes(const SpectralDensity& psd, double beta, const FrequencyGrid& grid) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("transmitted_modes: beta must lie in (0, 1]");
  const Eigen::VectorXd v = psd.sample(grid);
  const std::int64_t n = grid.size();
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t i, std::int64_t j) { return v[i] > v[j]; });
  const auto take = static_cast<std::int64_t>(std::floor(beta * static_cast<double>(n)));
  ModeSet set;
  set.grid = grid;
  set.indicator.assign(n, 0);
  set.ordered.assign(order.begin(), order.begin() + take);
  for (std::int64_t k : set.ordered) set.indicator[k] = 1;
  set.level = take > 0 ? v[set.ordered.back()] : std::numeric_limits<double>::infinity();
  set.beta_actual = static_cast<double>(take) / static_cast<double>(n);
  return set;
}

namespace {

// Fourier coefficients r_k = int phi(nu) e^{-j 2 pi nu k} dnu for k = 0..n-1,
// by forward FFT of the PSD samples.
Eigen::VectorXcd psd_fourier_coeffs(const Eigen::VectorXd& samples, int n) {
  const auto N = samples.size();
  if (2 * n > N)
    throw std::invalid_argument("toeplitz_covariance: quadrature grid too coarse for requested block");
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in(samples.data(), samples.data() + N);
  std::vector<std::complex<double>> out(N);
  fft.fwd(out, in);
  Eigen::VectorXcd r(n);
  for (int k = 0; k < n; ++k) r[k] = out[k] / static_cast<double>(N);
  return r;
}

}  // namespace

CovarianceMatrix toeplitz_covariance(const SpectralDensity& psd, int n, const FrequencyGrid& grid) {
  if (psd.dim() != 1) throw std::invalid_argument("toeplitz_covariance: 1-D overload needs a 1-D PSD");
  if (n < 1) throw std::invalid_argument("toeplitz_covariance: n must be positive");
  const Eigen::VectorXcd r = psd_fourier_coeffs(psd.sample(grid), n);
  CovarianceMatrix cov;
  cov.structure = CovStructure::Toeplitz;
  cov.m.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov.m(i, j) = i >= j ? r[i - j] : std::conj(r[j - i]);
  return cov;
}

CovarianceMatrix toeplitz_covariance(const SpectralDensity& psd, const std::vector<int>& nvec,
                                     const FrequencyGrid& grid) {
  if (static_cast<int>(nvec.size()) != psd.dim() || grid.dim != psd.dim())
    throw std::invalid_argument("toeplitz_covariance: dimension mismatch");
  if (psd.dim() == 1) return toeplitz_covariance(psd, nvec[0], grid);
  if (psd.dim() != 2) throw std::invalid_argument("toeplitz_covariance: only 1-D and 2-D supported");
  const int n1 = nvec[0], n2 = nvec[1];
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("toeplitz_covariance: block sizes must be positive");
  const int N = grid.n_axis;
  if (2 * n1 > N || 2 * n2 > N)
    throw std::invalid_argument("toeplitz_covariance: quadrature grid too coarse for requested block");

  // Separable 2-D DFT of the sample field, rows then columns.
  Eigen::MatrixXcd field(N, N);
  {
    const Eigen::VectorXd s = psd.sample(grid);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) field(i, j) = s[static_cast<std::int64_t>(i) * N + j];
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> buf(N), spec(N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) buf[j] = field(i, j);
    fft.fwd(spec, buf);
    for (int j = 0; j < N; ++j) field(i, j) = spec[j];
  }
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) buf[i] = field(i, j);
    fft.fwd(spec, buf);
    for (int i = 0; i < N; ++i) field(i, j) = spec[i];
  }
  const double scale = 1.0 / (static_cast<double>(N) * N);

  auto lag = [&](int k1, int k2) -> std::complex<double> {
    const int i = ((k1 % N) + N) % N;
    const int j = ((k2 % N) + N) % N;
    return field(i, j) * scale;
  };

  const std::int64_t n = static_cast<std::int64_t>(n1) * n2;
  CovarianceMatrix cov;
  cov.structure = CovStructure::MultilevelToeplitz;
  cov.m.resize(n, n);
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int j1 = 0; j1 < n1; ++j1)
        for (int j2 = 0; j2 < n2; ++j2)
          cov.m(static_cast<std::int64_t>(i1) * n2 + i2, static_cast<std::int64_t>(j1) * n2 + j2) =
              lag(i1 - j1, i2 - j2);
  return cov;
}

Eigen::MatrixXd pde2d_system_matrix(int n1, int n2, double a0, double ax, double ay) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("pde2d_system_matrix: lattice sizes must be positive");
  const std::int64_t n = static_cast<std::int64_t>(n1) * n2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const std::int64_t k = static_cast<std::int64_t>(i) * n2 + j;
      A(k, k) = a0;
      if (j + 1 < n2) {
        A(k, k + 1) = ay;
        A(k + 1, k) = ay;
      }
      if (i + 1 < n1) {
        A(k, k + n2) = ax;
        A(k + n2, k) = ax;
      }
    }
  return A;
}

CovarianceMatrix pde2d_covariance(int n1, int n2, double a0, double ax, double ay, double sigma_q2) {
  if (sigma_q2 <= 0.0) throw std::invalid_argument("pde2d_covariance: sigma_q2 must be positive");
  const Eigen::MatrixXd A = pde2d_system_matrix(n1, n2, a0, ax, ay);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "pde2d_covariance: operator is numerically singular (rcond = " << rcond
       << " for a0 = " << a0 << ", ax = " << ax << ", ay = " << ay << ")";
    throw std::invalid_argument(os.str());
  }
  const auto n = A.rows();
  const Eigen::MatrixXd Ainv = lu.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd cov_real = sigma_q2 * (Ainv * Ainv.transpose());
  cov_real = 0.5 * (cov_real + cov_real.transpose()).eval();
  CovarianceMatrix cov;
  cov.structure = CovStructure::General;
  cov.m = cov_real.cast<std::complex<double>>();
  return cov;
}

}  // namespace specdet
