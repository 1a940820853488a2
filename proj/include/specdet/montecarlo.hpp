#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "specdet/detector.hpp"
#include "specdet/energy.hpp"
#include "specdet/spectra.hpp"

namespace specdet {

// Deterministic per-trial random stream: the state is derived from
// (master seed, role, trial index) alone, so results do not depend on how
// trials are scheduled across threads.
class RngStream {
 public:
  static RngStream for_trial(std::uint64_t master, std::uint32_t role, std::uint64_t trial);

  std::uint64_t next_u64();
  double uniform();                    // (0, 1]
  double normal();                     // standard normal
  std::complex<double> cnormal();      // circularly symmetric, unit variance
  Eigen::VectorXcd cnormal_vector(Eigen::Index n);

 private:
  std::uint64_t s_[4] = {0, 0, 0, 0};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Draws x = L g with L a square root of the covariance; Cholesky when the
// matrix is positive definite, a clamped eigenvalue square root otherwise.
class GaussianVectorSampler {
 public:
  explicit GaussianVectorSampler(const Eigen::MatrixXcd& cov);
  Eigen::VectorXcd draw(RngStream& rng) const;
  Eigen::Index dim() const { return factor_.rows(); }

 private:
  Eigen::MatrixXcd factor_;
};

// Field sampler for the 2-D process: draws the forcing q and solves A s = q.
class PdeProcessSampler {
 public:
  PdeProcessSampler(int n1, int n2, double a0, double ax, double ay, double sigma_q2);
  Eigen::VectorXcd draw(RngStream& rng) const;
  Eigen::Index dim() const { return lu_.rows(); }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double sigma_q_ = 0.0;
};

// Empirical (1 - alpha) quantile with the "higher" interpolation rule.
// Requires at least ceil(10 / alpha) values.
double calibrate_threshold(std::vector<double> h0_values, double alpha);

enum class DetectorKind { Cd, Pcs, Pfs };

struct TrialConfig {
  SpectralDensity psd;
  double sigma_v2 = 1.0;
  double sigma_w2 = 1.0;
  double Et = 1.0;
  double beta = 1.0;
  ProfileKind profile = ProfileKind::Cep;
  std::vector<DetectorKind> strategies = {DetectorKind::Cd};
  std::vector<std::vector<int>> sizes;  // sensor lattice per run, e.g. {64} or {8, 8}
  std::int64_t trials = 10000;          // per hypothesis set (calibration, held-out H0, H1)
  double alpha = 1e-2;
  std::uint64_t seed = 1;
  int streams = 1;
};

struct McEstimate {
  int n = 0;  // total sensor count
  DetectorKind strategy = DetectorKind::Cd;
  double threshold = 0.0;
  double p_fa_hat = 0.0, p_fa_se = 0.0;
  double p_m_hat = 0.0, p_m_se = 0.0;
  double exponent_hat = 0.0, exponent_se = 0.0;
  bool censored = false;  // no observed miss: rule-of-three bound reported
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

// Full calibrate-then-evaluate experiment: disjoint H0 calibration and
// evaluation sets plus an H1 set, shared draws across strategies, exponent
// estimate -log(P_m) / n.  Deterministic for a given seed regardless of the
// stream count.
std::vector<McEstimate> run_experiment(const TrialConfig& cfg);

}  // namespace specdet
