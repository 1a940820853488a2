#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "specdet/grid.hpp"

namespace specdet {

enum class PsdKind { Arma1d, Pde2d, Tabulated };

// Power spectral density of a stationary process on the unit frequency cube.
// Three parametrisations:
//   Arma1d    phi(nu) = sigma_in^2 |B(e^{-j2pi nu})|^2 / |A(e^{-j2pi nu})|^2
//   Pde2d     phi(nu) = sigma_q^2 / (a0 + 2 ax cos(2pi nu_x) + 2 ay cos(2pi nu_y))^2
//   Tabulated nonnegative samples on a FrequencyGrid, nearest-node lookup
class SpectralDensity {
 public:
  // Flat unit spectrum; placeholder until a real factory result is assigned.
  SpectralDensity() : variance_(1.0), b_(Eigen::VectorXd::Ones(1)), a_(Eigen::VectorXd::Ones(1)), sigma_in2_(1.0) {}

  static SpectralDensity arma1d(Eigen::VectorXd b, Eigen::VectorXd a, double sigma_in2);
  // Chooses sigma_in2 so the process variance (integral of phi) equals sigma_s2.
  static SpectralDensity arma1d_normalized(Eigen::VectorXd b, Eigen::VectorXd a, double sigma_s2,
                                           const FrequencyGrid& grid = FrequencyGrid::default_for(1));
  static SpectralDensity pde2d(double a0, double ax, double ay, double sigma_q2);
  static SpectralDensity tabulated(const FrequencyGrid& grid, Eigen::VectorXd values);

  double operator()(const Eigen::VectorXd& nu) const;
  double operator()(double nu) const;  // 1-D convenience

  PsdKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // Process variance, computed once on the default grid for the dimension.
  double variance() const { return variance_; }
  double sigma_in2() const { return sigma_in2_; }
  double sigma_q2() const { return sigma_q2_; }
  const Eigen::VectorXd& ma_coeffs() const { return b_; }
  const Eigen::VectorXd& ar_coeffs() const { return a_; }
  double pde_a0() const { return a0_; }
  double pde_ax() const { return ax_; }
  double pde_ay() const { return ay_; }

  // Samples at every node of the grid, in unwound order.
  Eigen::VectorXd sample(const FrequencyGrid& grid) const;

 private:
  PsdKind kind_ = PsdKind::Arma1d;
  int dim_ = 1;
  double variance_ = 0.0;
  // ARMA
  Eigen::VectorXd b_, a_;
  double sigma_in2_ = 0.0;
  // PDE
  double a0_ = 0.0, ax_ = 0.0, ay_ = 0.0, sigma_q2_ = 0.0;
  // Tabulated
  FrequencyGrid tab_grid_;
  Eigen::VectorXd tab_values_;
};

// sigma_in2 making the ARMA shape integrate to sigma_s2 over [0,1].
double normalize_input_power(const Eigen::VectorXd& b, const Eigen::VectorXd& a, double sigma_s2,
                             const FrequencyGrid& grid = FrequencyGrid::default_for(1));

// Lebesgue measure of {nu : phi(nu) > t}, approximated by node counting.
double omega(const SpectralDensity& psd, double t, const FrequencyGrid& grid);

// Nodes of the grid holding the floor(beta * N) largest PSD values.
// Ties are broken toward the smaller unwound index.
struct ModeSet {
  FrequencyGrid grid;
  std::vector<char> indicator;        // one per node
  std::vector<std::int64_t> ordered;  // selected nodes, PSD descending
  double level = 0.0;                 // smallest PSD value inside the set
  double beta_actual = 0.0;
};

ModeSet transmitted_modes(const SpectralDensity& psd, double beta, const FrequencyGrid& grid);

enum class CovStructure { Toeplitz, MultilevelToeplitz, Circulant, General };

struct CovarianceMatrix {
  Eigen::MatrixXcd m;
  CovStructure structure = CovStructure::General;
};

// Covariance of n consecutive samples: entries are Fourier coefficients of
// the PSD, computed by FFT of the grid samples.  The p-level variant takes
// the block sizes along each axis.
CovarianceMatrix toeplitz_covariance(const SpectralDensity& psd, int n,
                                     const FrequencyGrid& grid = FrequencyGrid::default_for(1));
CovarianceMatrix toeplitz_covariance(const SpectralDensity& psd, const std::vector<int>& nvec,
                                     const FrequencyGrid& grid);

// Discretised 2-D PDE operator on an n1 x n2 lattice (row-major unwinding):
// a0 on the diagonal, ay coupling along the fast axis, ax along the slow one.
Eigen::MatrixXd pde2d_system_matrix(int n1, int n2, double a0, double ax, double ay);

// Covariance sigma_q^2 (A A^T)^{-1} of the PDE field.
CovarianceMatrix pde2d_covariance(int n1, int n2, double a0, double ax, double ay, double sigma_q2);

}  // namespace specdet
