#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "specdet/energy.hpp"
#include "specdet/exponent.hpp"

using namespace specdet;

namespace {

const double kSigmaV2 = std::pow(10.0, -0.5);  // measurement SNR of 5 dB at unit signal power

}  // namespace

TEST_CASE("budget normalises by total received power") {
  const SpectralDensity psd = oracle::test_psd_broad();
  CHECK(energy_budget(psd, 2.0, 1.0) == doctest::Approx(2.0 / (1.0 + 1.0)));
  CHECK(energy_budget(psd, 1.0, kSigmaV2) == doctest::Approx(1.0 / (1.0 + kSigmaV2)));
}

TEST_CASE("constant profile spends the budget uniformly") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 512);
  const double c = energy_budget(psd, 1.0, kSigmaV2);
  const EnergyProfile p = profile_cep(psd, 1.0, kSigmaV2, g);
  CHECK(p.kind == ProfileKind::Cep);
  CHECK(p.xi.minCoeff() == doctest::Approx(c));
  CHECK(p.xi.maxCoeff() == doctest::Approx(c));
  CHECK(p.total() == doctest::Approx(c).epsilon(1e-12));
  CHECK(p.beta_star == doctest::Approx(1.0));
}

TEST_CASE("restricted constant profile concentrates the same budget") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 512);
  const ModeSet set = transmitted_modes(psd, 0.4, g);
  const double c = energy_budget(psd, 1.0, kSigmaV2);
  const EnergyProfile p = profile_cep(psd, 1.0, kSigmaV2, g, &set);
  CHECK(p.total() == doctest::Approx(c).epsilon(1e-12));
  CHECK(p.beta_star == doctest::Approx(set.beta_actual));
  for (std::int64_t k = 0; k < g.size(); ++k) {
    if (set.indicator[k]) CHECK(p.xi[k] == doctest::Approx(c / set.beta_actual));
    else CHECK(p.xi[k] == 0.0);
  }
}

TEST_CASE("shaped profile is proportional to the psd") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 512);
  const double c = energy_budget(psd, 1.0, kSigmaV2);
  const EnergyProfile p = profile_sep(psd, 1.0, kSigmaV2, g);
  CHECK(p.total() == doctest::Approx(c).epsilon(1e-10));
  const double ratio = p.xi[10] / psd(g.node(10));
  for (std::int64_t k : {1, 100, 317, 500})
    CHECK(p.xi[k] == doctest::Approx(ratio * psd(g.node(k))).epsilon(1e-10));
}

TEST_CASE("cubic roots agree with the companion matrix") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> unif(0.05, 3.0);
  for (int rep = 0; rep < 500; ++rep) {
    const double phi = unif(gen), lambda = 0.1 * unif(gen), sv2 = 0.3 * unif(gen),
                 sw2 = 0.5 * unif(gen);
    const double a3 = lambda * sv2 * (phi + sv2) * (phi + sv2);
    const double a2 = lambda * sw2 * (phi * phi + 4 * phi * sv2 + 3 * sv2 * sv2);
    const double a1 = sw2 * (lambda * sw2 * (2 * phi + 3 * sv2) - phi * phi);
    const double a0 = lambda * sw2 * sw2 * sw2;
    const std::vector<double> ref = oracle::companion_roots3(a3, a2, a1, a0);
    const CubicRoots got = oep_cubic_roots(phi, lambda, sv2, sw2);
    REQUIRE(got.count == static_cast<int>(ref.size()));
    for (int i = 0; i < got.count; ++i) {
      CHECK(got.r[i] == doctest::Approx(ref[i]).epsilon(1e-8));
      // residual of the original polynomial
      const double x = got.r[i];
      const double res = ((a3 * x + a2) * x + a1) * x + a0;
      const double scale = std::abs(a3 * x * x * x) + std::abs(a2 * x * x) + std::abs(a1 * x) +
                           std::abs(a0);
      CHECK(std::abs(res) <= 1e-10 * (scale + 1.0));
    }
  }
}

TEST_CASE("marginal gain differentiates the per frequency exponent") {
  const auto integrand = [](double xi, double phi, double sv2, double sw2) {
    if (xi <= 0.0) return 0.0;
    const double gamma = xi * phi / (xi * sv2 + sw2);
    return 1.0 / (1.0 + gamma) + std::log1p(gamma) - 1.0;
  };
  for (double xi : {0.2, 1.0, 4.0}) {
    const double phi = 1.3, sv2 = 0.4, sw2 = 0.8, h = 1e-6;
    const double fd = (integrand(xi + h, phi, sv2, sw2) - integrand(xi - h, phi, sv2, sw2)) / (2 * h);
    CHECK(oep_marginal_gain(xi, phi, sv2, sw2) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(oep_marginal_gain(0.0, 1.3, 0.4, 0.8) == doctest::Approx(0.0));
}

TEST_CASE("optimal profile meets the budget with a valid certificate") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 2048);
  const double Et = 1.0, sw2 = 1.0;
  const OepSolution sol = solve_oep(psd, 0.6, Et, kSigmaV2, sw2, g);
  CHECK(sol.lambda_star > 0.0);
  CHECK(sol.certificate.all_ok());
  CHECK(sol.certificate.budget_residual <= 1e-8);
  CHECK(sol.profile.beta_star <= 0.6 + 1e-12);
  // support stays inside the admissible band
  for (std::int64_t k = 0; k < g.size(); ++k)
    if (sol.profile.xi[k] > 0.0 && sol.profile.weights[k] > 0.0) CHECK(sol.domain.indicator[k] != 0);
}

TEST_CASE("optimal profile dominates the fixed shapes") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 2048);
  const double Et = 1.0, sw2 = 1.0, beta = 0.6;
  const OepSolution sol = solve_oep(psd, beta, Et, kSigmaV2, sw2, g);
  const ModeSet set = transmitted_modes(psd, beta, g);
  const auto exponent = [&](const EnergyProfile& p) {
    return kappa_m_alpha(snr_spectrum_dd(psd, p, kSigmaV2, sw2));
  };
  const double k_oep = exponent(sol.profile);
  CHECK(k_oep >= exponent(profile_cep(psd, Et, kSigmaV2, g, &set)) - 1e-8);
  CHECK(k_oep >= exponent(profile_sep(psd, Et, kSigmaV2, g, &set)) - 1e-8);
  CHECK(k_oep >= exponent(profile_onoff(psd, Et, kSigmaV2, sol.profile)) - 1e-8);
}

TEST_CASE("multiplier falls as the budget grows") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 1024);
  const OepSolution tight = solve_oep(psd, 1.0, 0.5, kSigmaV2, 1.0, g);
  const OepSolution loose = solve_oep(psd, 1.0, 2.0, kSigmaV2, 1.0, g);
  CHECK(loose.lambda_star < tight.lambda_star);
  CHECK(loose.profile.total() > tight.profile.total());
}

TEST_CASE("noisier channels narrow the occupied band") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 1024);
  const OepSolution quiet = solve_oep(psd, 1.0, 1.0, kSigmaV2, 0.1, g);
  const OepSolution noisy = solve_oep(psd, 1.0, 1.0, kSigmaV2, 10.0, g);
  CHECK(noisy.profile.beta_star <= quiet.profile.beta_star + 1e-12);
  CHECK(noisy.certificate.all_ok());
  CHECK(quiet.certificate.all_ok());
}

TEST_CASE("on off profile flattens another profile's support") {
  const SpectralDensity psd = oracle::test_psd_broad();
  const FrequencyGrid g(1, 1024);
  const OepSolution sol = solve_oep(psd, 0.5, 1.0, kSigmaV2, 2.0, g);
  const EnergyProfile flat = profile_onoff(psd, 1.0, kSigmaV2, sol.profile);
  const double c = energy_budget(psd, 1.0, kSigmaV2);
  CHECK(flat.total() == doctest::Approx(c).epsilon(1e-10));
  CHECK(flat.beta_star == doctest::Approx(sol.profile.beta_star));
  double level = 0.0;
  for (std::int64_t k = 0; k < g.size(); ++k) {
    if (sol.profile.xi[k] > 0.0) {
      if (level == 0.0) level = flat.xi[k];
      CHECK(flat.xi[k] == doctest::Approx(level));
    } else {
      CHECK(flat.xi[k] == 0.0);
    }
  }
}
