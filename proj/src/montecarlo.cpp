#include "specdet/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace specdet {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Splits [0, count) into chunks and runs body(first, last) on worker threads.
void parallel_chunks(std::int64_t count, int streams, const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (streams <= 1 || count < 2) {
    body(0, count);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(streams, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t first = w * chunk;
    const std::int64_t last = std::min(count, first + chunk);
    if (first >= last) break;
    pool.emplace_back(body, first, last);
  }
  for (auto& t : pool) t.join();
}

}  // namespace

RngStream RngStream::for_trial(std::uint64_t master, std::uint32_t role, std::uint64_t trial) {
  RngStream rng;
  std::uint64_t seed = master;
  (void)splitmix64(seed);
  seed ^= 0xA0761D6478BD642Full * (static_cast<std::uint64_t>(role) + 1);
  (void)splitmix64(seed);
  seed ^= trial;
  for (auto& word : rng.s_) word = splitmix64(seed);
  return rng;
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform(), u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

std::complex<double> RngStream::cnormal() {
  const double scale = 0x1.6a09e667f3bcdp-1;  // 1/sqrt(2)
  const double re = normal(), im = normal();
  return {re * scale, im * scale};
}

Eigen::VectorXcd RngStream::cnormal_vector(Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cnormal();
  return v;
}

GaussianVectorSampler::GaussianVectorSampler(const Eigen::MatrixXcd& cov) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("GaussianVectorSampler: matrix must be square");
  Eigen::LLT<Eigen::MatrixXcd> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("GaussianVectorSampler: factorisation failed");
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  factor_ = es.eigenvectors() * clamped.cwiseSqrt().asDiagonal();
}

Eigen::VectorXcd GaussianVectorSampler::draw(RngStream& rng) const {
  return factor_ * rng.cnormal_vector(factor_.cols());
}

PdeProcessSampler::PdeProcessSampler(int n1, int n2, double a0, double ax, double ay,
                                     double sigma_q2)
    : lu_(pde2d_system_matrix(n1, n2, a0, ax, ay)), sigma_q_(std::sqrt(sigma_q2)) {
  if (!(sigma_q2 > 0.0)) throw std::invalid_argument("PdeProcessSampler: sigma_q2 must be positive");
  if (!(lu_.rcond() > 1e-14)) throw std::runtime_error("PdeProcessSampler: operator is singular");
}

Eigen::VectorXcd PdeProcessSampler::draw(RngStream& rng) const {
  const Eigen::VectorXcd q = sigma_q_ * rng.cnormal_vector(lu_.rows());
  Eigen::VectorXcd s(q.size());
  s.real() = lu_.solve(q.real().eval());
  s.imag() = lu_.solve(q.imag().eval());
  return s;
}

double calibrate_threshold(std::vector<double> h0_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("calibrate_threshold: alpha in (0, 1)");
  const auto m = static_cast<std::int64_t>(h0_values.size());
  const auto floor_m = static_cast<std::int64_t>(std::ceil(10.0 / alpha));
  if (m < floor_m) {
    std::ostringstream os;
    os << "calibrate_threshold: " << m << " calibration values, need at least " << floor_m
       << " for alpha = " << alpha;
    throw std::invalid_argument(os.str());
  }
  std::sort(h0_values.begin(), h0_values.end());
  const auto idx = static_cast<std::int64_t>(std::ceil((1.0 - alpha) * static_cast<double>(m - 1)));
  return h0_values[idx];
}

namespace {

struct DetectorModel {
  DetectorKind kind;
  LlrEvaluator eval;
  Eigen::MatrixXcd compress;  // C^H, empty for CD
  Eigen::Index n_prime = 0;
};

}  // namespace

std::vector<McEstimate> run_experiment(const TrialConfig& cfg) {
  if (cfg.sizes.empty()) throw std::invalid_argument("run_experiment: no lattice sizes given");
  if (cfg.strategies.empty()) throw std::invalid_argument("run_experiment: no strategies given");
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be positive");

  std::vector<McEstimate> results;
  std::uint32_t role_base = 0;
  for (const auto& lattice : cfg.sizes) {
    std::int64_t n64 = 1;
    for (int d : lattice) n64 *= d;
    const int n = static_cast<int>(n64);

    // Process covariance and the H1 process sampler.
    CovarianceMatrix cov;
    std::optional<PdeProcessSampler> pde_sampler;
    std::optional<GaussianVectorSampler> cov_sampler;
    if (cfg.psd.kind() == PsdKind::Pde2d) {
      if (lattice.size() != 2)
        throw std::invalid_argument("run_experiment: 2-D PSD needs a 2-D lattice");
      cov = pde2d_covariance(lattice[0], lattice[1], cfg.psd.pde_a0(), cfg.psd.pde_ax(),
                             cfg.psd.pde_ay(), cfg.psd.sigma_q2());
      pde_sampler.emplace(lattice[0], lattice[1], cfg.psd.pde_a0(), cfg.psd.pde_ax(),
                          cfg.psd.pde_ay(), cfg.psd.sigma_q2());
    } else {
      const FrequencyGrid quad = FrequencyGrid::default_for(cfg.psd.dim());
      cov = toeplitz_covariance(cfg.psd, lattice, quad);
      cov_sampler.emplace(cov.m);
    }

    // Energy profile shared by the decentralized strategies.
    const FrequencyGrid ref = FrequencyGrid::default_for(cfg.psd.dim());
    std::optional<EnergyProfile> profile;
    const bool any_dd = std::any_of(cfg.strategies.begin(), cfg.strategies.end(),
                                    [](DetectorKind k) { return k != DetectorKind::Cd; });
    if (any_dd) {
      switch (cfg.profile) {
        case ProfileKind::Cep:
          profile = profile_cep(cfg.psd, cfg.Et, cfg.sigma_v2, ref);
          break;
        case ProfileKind::Sep:
          profile = profile_sep(cfg.psd, cfg.Et, cfg.sigma_v2, ref);
          break;
        case ProfileKind::Oep:
          profile = solve_oep(cfg.psd, cfg.beta, cfg.Et, cfg.sigma_v2, cfg.sigma_w2, ref).profile;
          break;
        case ProfileKind::OnOff:
          // Constant level on the support of the optimal profile.
          profile = profile_onoff(
              cfg.psd, cfg.Et, cfg.sigma_v2,
              solve_oep(cfg.psd, cfg.beta, cfg.Et, cfg.sigma_v2, cfg.sigma_w2, ref).profile);
          break;
        default:
          throw std::invalid_argument("run_experiment: unsupported profile kind");
      }
    }

    std::vector<DetectorModel> models;
    Eigen::Index max_np = 0;
    for (DetectorKind kind : cfg.strategies) {
      if (kind == DetectorKind::Cd) {
        const Eigen::MatrixXcd c0 = cfg.sigma_v2 * Eigen::MatrixXcd::Identity(n, n);
        const Eigen::MatrixXcd c1 = cov.m + c0;
        models.push_back({kind, LlrEvaluator(c0, c1, n), Eigen::MatrixXcd(), 0});
      } else {
        Precoder pre = kind == DetectorKind::Pcs
                           ? build_pcs_precoder(cov, cfg.psd, lattice, cfg.beta, *profile,
                                                cfg.sigma_v2, ref)
                           : build_pfs_precoder(cfg.psd, lattice, cfg.beta, *profile,
                                                cfg.sigma_v2, ref);
        const DdCovariances dd = dd_covariances(pre, cov, cfg.sigma_v2, cfg.sigma_w2);
        models.push_back({kind, LlrEvaluator(dd.xi0, dd.xi1, n), pre.matrix().adjoint(),
                          pre.n_prime()});
        max_np = std::max(max_np, pre.n_prime());
      }
    }

    const double sigma_v = std::sqrt(cfg.sigma_v2);
    const double sigma_w = std::sqrt(cfg.sigma_w2);
    const auto n_strat = static_cast<Eigen::Index>(models.size());

    // Statistics per (set, trial, strategy); role ids keep the three sets on
    // disjoint streams and distinct lattice sizes apart.
    enum Role : std::uint32_t { Calibrate = 0, HeldOut = 1, Signal = 2 };
    std::array<Eigen::MatrixXd, 3> stats;
    for (auto& m : stats) m.resize(cfg.trials, n_strat);

    auto run_set = [&](Role role, bool under_h1) {
      Eigen::MatrixXd& out = stats[role];
      parallel_chunks(cfg.trials, cfg.streams, [&](std::int64_t first, std::int64_t last) {
        for (std::int64_t t = first; t < last; ++t) {
          RngStream rng = RngStream::for_trial(cfg.seed, role_base + role, static_cast<std::uint64_t>(t));
          Eigen::VectorXcd x;
          if (under_h1) {
            const Eigen::VectorXcd s = pde_sampler ? pde_sampler->draw(rng) : cov_sampler->draw(rng);
            x = s + sigma_v * rng.cnormal_vector(n);
          } else {
            x = sigma_v * rng.cnormal_vector(n);
          }
          // One channel-noise draw shared by every decentralized strategy.
          Eigen::VectorXcd w;
          if (max_np > 0) w = sigma_w * rng.cnormal_vector(max_np);
          for (Eigen::Index m = 0; m < n_strat; ++m) {
            const DetectorModel& model = models[m];
            if (model.kind == DetectorKind::Cd) {
              out(t, m) = model.eval(x);
            } else {
              const Eigen::VectorXcd z = model.compress * x + w.head(model.n_prime);
              out(t, m) = model.eval(z);
            }
          }
        }
      });
    };
    run_set(Calibrate, false);
    run_set(HeldOut, false);
    run_set(Signal, true);

    for (Eigen::Index m = 0; m < n_strat; ++m) {
      McEstimate est;
      est.n = n;
      est.strategy = models[m].kind;
      est.trials = cfg.trials;
      est.seed = cfg.seed;
      std::vector<double> cal(cfg.trials);
      for (std::int64_t t = 0; t < cfg.trials; ++t) cal[t] = stats[Calibrate](t, m);
      est.threshold = calibrate_threshold(std::move(cal), cfg.alpha);

      std::int64_t fa = 0, miss = 0;
      for (std::int64_t t = 0; t < cfg.trials; ++t) {
        if (stats[HeldOut](t, m) > est.threshold) ++fa;
        if (stats[Signal](t, m) <= est.threshold) ++miss;
      }
      const auto trials_d = static_cast<double>(cfg.trials);
      est.p_fa_hat = static_cast<double>(fa) / trials_d;
      est.p_fa_se = std::sqrt(est.p_fa_hat * (1.0 - est.p_fa_hat) / trials_d);
      if (miss == 0) {
        est.censored = true;
        est.p_m_hat = 3.0 / trials_d;  // rule-of-three upper bound
        est.p_m_se = 0.0;
        est.exponent_hat = -std::log(est.p_m_hat) / n;
        est.exponent_se = 0.0;
      } else {
        est.p_m_hat = static_cast<double>(miss) / trials_d;
        est.p_m_se = std::sqrt(est.p_m_hat * (1.0 - est.p_m_hat) / trials_d);
        est.exponent_hat = -std::log(est.p_m_hat) / n;
        est.exponent_se = est.p_m_se / (est.p_m_hat * n);
      }
      results.push_back(est);
    }
    role_base += 3;
  }
  return results;
}

}  // namespace specdet
