#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "specdet/detector.hpp"
#include "specdet/montecarlo.hpp"

using namespace specdet;

namespace {

const double kSigmaV2 = std::pow(10.0, -0.5);

struct Setup {
  SpectralDensity psd = oracle::test_psd_broad();
  FrequencyGrid grid{1, 1024};
  std::vector<int> lattice{16};
  CovarianceMatrix cov;
  EnergyProfile profile;

  Setup() {
    cov = toeplitz_covariance(psd, 16, grid);
    profile = profile_cep(psd, 1.0, kSigmaV2, grid);
  }
};

Eigen::VectorXcd random_cvector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::complex<double>(nd(gen), nd(gen));
  return v;
}

}  // namespace

TEST_CASE("precoders keep an orthonormal basis and the requested width") {
  Setup s;
  const Precoder pcs =
      build_pcs_precoder(s.cov, s.psd, s.lattice, 0.5, s.profile, kSigmaV2, s.grid);
  const Precoder pfs = build_pfs_precoder(s.psd, s.lattice, 0.5, s.profile, kSigmaV2, s.grid);
  for (const Precoder* p : {&pcs, &pfs}) {
    CHECK(p->n() == 16);
    CHECK(p->n_prime() == 8);
    CHECK((p->basis.adjoint() * p->basis - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-10);
    CHECK(p->gains.minCoeff() > 0.0);
    CHECK(static_cast<int>(p->bins.size()) == 8);
  }
  // full band keeps every mode
  const Precoder full = build_pfs_precoder(s.psd, s.lattice, 1.0, s.profile, kSigmaV2, s.grid);
  CHECK(full.n_prime() == 16);
}

TEST_CASE("principal component basis diagonalises the covariance") {
  Setup s;
  const Precoder pcs =
      build_pcs_precoder(s.cov, s.psd, s.lattice, 0.5, s.profile, kSigmaV2, s.grid);
  const Eigen::MatrixXcd projected = pcs.basis.adjoint() * s.cov.m * pcs.basis;
  const Eigen::MatrixXcd off = projected - projected.diagonal().asDiagonal().toDenseMatrix();
  CHECK(off.norm() < 1e-10);
  // leading modes carry the largest variance, in order
  for (int k = 1; k < 8; ++k)
    CHECK(projected(k - 1, k - 1).real() >= projected(k, k).real() - 1e-12);
}

TEST_CASE("frequency basis picks the strongest bins with unit modulus entries") {
  Setup s;
  const Precoder pfs = build_pfs_precoder(s.psd, s.lattice, 0.5, s.profile, kSigmaV2, s.grid);
  const double mag = 1.0 / std::sqrt(16.0);
  for (int i = 0; i < 16; ++i)
    for (int k = 0; k < 8; ++k) CHECK(std::abs(pfs.basis(i, k)) == doctest::Approx(mag));
  // selected bins are the psd-strongest ones on the lattice
  std::vector<double> levels;
  for (int b = 0; b < 16; ++b) levels.push_back(s.psd(static_cast<double>(b) / 16.0));
  std::sort(levels.begin(), levels.end(), std::greater<double>());
  for (int k = 0; k < 8; ++k) {
    const double got = s.psd(static_cast<double>(pfs.bins[k]) / 16.0);
    CHECK(got == doctest::Approx(levels[k]));
  }
}

TEST_CASE("per node transmit energy respects the budget on average") {
  Setup s;
  const double Et = 1.0;
  const Precoder pfs = build_pfs_precoder(s.psd, s.lattice, 0.75, s.profile, kSigmaV2, s.grid);
  const Precoder pcs =
      build_pcs_precoder(s.cov, s.psd, s.lattice, 0.75, s.profile, kSigmaV2, s.grid);
  CHECK(pfs.per_node_energy.maxCoeff() <= Et + 1e-10);
  CHECK(pfs.per_node_energy.mean() <= Et + 1e-10);
  CHECK(pcs.per_node_energy.mean() <= Et + 1e-10);
  CHECK(pcs.per_node_energy.minCoeff() >= 0.0);
}

TEST_CASE("flat profiles give equal gains") {
  Setup s;
  const Precoder pfs = build_pfs_precoder(s.psd, s.lattice, 1.0, s.profile, kSigmaV2, s.grid);
  const double c = energy_budget(s.psd, 1.0, kSigmaV2);
  for (int k = 0; k < pfs.n_prime(); ++k)
    CHECK(pfs.gains[k] == doctest::Approx(std::sqrt(c)).epsilon(1e-10));
}

TEST_CASE("channel output is the compressed field plus noise") {
  Setup s;
  const Precoder pfs = build_pfs_precoder(s.psd, s.lattice, 0.5, s.profile, kSigmaV2, s.grid);
  const Eigen::VectorXcd x = random_cvector(16, 5);
  const Eigen::VectorXcd w = random_cvector(8, 6);
  const Eigen::VectorXcd z = mac_observe(pfs, x, w);
  const Eigen::VectorXcd ref = pfs.matrix().adjoint() * x + w;
  CHECK((z - ref).norm() < 1e-12);
}

TEST_CASE("observation covariances are positive definite and ordered") {
  Setup s;
  const Precoder pcs =
      build_pcs_precoder(s.cov, s.psd, s.lattice, 0.5, s.profile, kSigmaV2, s.grid);
  const DdCovariances dd = dd_covariances(pcs, s.cov, kSigmaV2, 0.8);
  const Eigen::MatrixXcd c = pcs.matrix();
  const Eigen::MatrixXcd ref0 =
      kSigmaV2 * c.adjoint() * c + 0.8 * Eigen::MatrixXcd::Identity(8, 8);
  CHECK((dd.xi0 - ref0).norm() < 1e-10);
  const Eigen::MatrixXcd ref1 = c.adjoint() * s.cov.m * c + ref0;
  CHECK((dd.xi1 - ref1).norm() < 1e-10);
  Eigen::LLT<Eigen::MatrixXcd> llt0(dd.xi0), llt1(dd.xi1);
  CHECK(llt0.info() == Eigen::Success);
  CHECK(llt1.info() == Eigen::Success);
  // hypothesis one never has less power
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dd.xi1 - dd.xi0, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("llr evaluator matches the explicit inverse") {
  for (int n : {2, 4, 6, 8}) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(n, n);
    const Eigen::MatrixXcd cov0 =
        a * a.adjoint() + Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Random(n, n);
    const Eigen::MatrixXcd cov1 = cov0 + b * b.adjoint();
    const LlrEvaluator eval(cov0, cov1, n);
    for (unsigned seed : {1u, 2u, 3u}) {
      const Eigen::VectorXcd q = random_cvector(n, seed);
      CHECK(std::abs(eval(q) - oracle::explicit_llr(q, cov0, cov1, n)) < 1e-10);
    }
  }
}

TEST_CASE("wrapped llr statistics use the right normalisation") {
  Setup s;
  const Eigen::MatrixXcd cov0 = kSigmaV2 * Eigen::MatrixXcd::Identity(16, 16);
  const Eigen::MatrixXcd cov1 = s.cov.m + cov0;
  const Eigen::VectorXcd x = random_cvector(16, 9);
  const LlrStatistic cd = centralized_llr(x, cov0, cov1);
  CHECK(cd.n == 16);
  CHECK(cd.value == doctest::Approx(oracle::explicit_llr(x, cov0, cov1, 16)).epsilon(1e-10));

  const Precoder pfs = build_pfs_precoder(s.psd, s.lattice, 0.5, s.profile, kSigmaV2, s.grid);
  const DdCovariances dd = dd_covariances(pfs, s.cov, kSigmaV2, 0.8);
  const Eigen::VectorXcd z = mac_observe(pfs, x, random_cvector(8, 10));
  const LlrStatistic st = decentralized_llr(z, dd, 16);
  CHECK(st.n == 16);
  // normalised by the sensor count, not the compressed length
  CHECK(st.value == doctest::Approx(oracle::explicit_llr(z, dd.xi0, dd.xi1, 16)).epsilon(1e-10));
}

TEST_CASE("llr separates the hypotheses in the mean") {
  Setup s;
  RngStream rng = RngStream::for_trial(77, 0, 0);
  const Eigen::MatrixXcd cov0 = kSigmaV2 * Eigen::MatrixXcd::Identity(16, 16);
  const Eigen::MatrixXcd cov1 = s.cov.m + cov0;
  const LlrEvaluator eval(cov0, cov1, 16);
  GaussianVectorSampler signal(s.cov.m);
  double sum1 = 0.0, sum0 = 0.0;
  const int reps = 400;
  for (int i = 0; i < reps; ++i) {
    const Eigen::VectorXcd noise = std::sqrt(kSigmaV2) * rng.cnormal_vector(16);
    sum0 += eval(std::sqrt(kSigmaV2) * rng.cnormal_vector(16));
    sum1 += eval(signal.draw(rng) + noise);
  }
  CHECK(sum1 / reps > 0.0);
  CHECK(sum0 / reps < 0.0);
}
