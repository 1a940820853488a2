#include "specdet/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "specdet/exponent.hpp"
#include "specdet/toeplitz.hpp"

namespace specdet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Validation helpers: every problem is recorded, nothing throws until the end.

struct Validator {
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
  }

  bool has(const json& obj, const std::string& key) { return obj.contains(key); }

  double number(const json& obj, const std::string& key, const std::string& path, double fallback,
                bool required) {
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing required number");
      return fallback;
    }
    if (!obj[key].is_number()) {
      fail(path + "." + key, "expected a number");
      return fallback;
    }
    return obj[key].get<double>();
  }

  std::string text(const json& obj, const std::string& key, const std::string& path,
                   const std::string& fallback, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing required string");
      return fallback;
    }
    if (!obj[key].is_string()) {
      fail(path + "." + key, "expected a string");
      return fallback;
    }
    return obj[key].get<std::string>();
  }

  std::vector<double> number_list(const json& obj, const std::string& key, const std::string& path,
                                  bool required) {
    std::vector<double> out;
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing required array");
      return out;
    }
    if (!obj[key].is_array() || obj[key].empty()) {
      fail(path + "." + key, "expected a non-empty array of numbers");
      return out;
    }
    for (const auto& v : obj[key]) {
      if (!v.is_number()) {
        fail(path + "." + key, "expected numbers only");
        return {};
      }
      out.push_back(v.get<double>());
    }
    return out;
  }
};

struct Sweep {
  double from = 0.0, to = 0.0, step = 1.0;
  std::vector<double> points() const {
    std::vector<double> p;
    const auto count = static_cast<std::int64_t>(std::floor((to - from) / step + 1e-9));
    for (std::int64_t i = 0; i <= count; ++i) p.push_back(from + static_cast<double>(i) * step);
    return p;
  }
};

Sweep sweep_block(Validator& v, const json& obj, const std::string& key, const std::string& path,
                  double default_step, bool required) {
  Sweep s;
  s.step = default_step;
  if (!obj.contains(key)) {
    if (required) v.fail(path + "." + key, "missing required range {from, to, step}");
    return s;
  }
  const json& r = obj[key];
  if (!r.is_object()) {
    v.fail(path + "." + key, "expected an object {from, to, step}");
    return s;
  }
  const std::string rp = path + "." + key;
  v.check_keys(r, rp, {"from", "to", "step"});
  s.from = v.number(r, "from", rp, 0.0, true);
  s.to = v.number(r, "to", rp, 0.0, true);
  s.step = v.number(r, "step", rp, default_step, false);
  if (!(s.step > 0.0)) v.fail(rp + ".step", "step must be positive");
  if (s.to < s.from) v.fail(rp, "to must not be below from");
  return s;
}

// PSD block -> SpectralDensity.  Returns nullopt when validation failed.
std::optional<SpectralDensity> psd_from_json(Validator& v, const json& obj, const std::string& path) {
  if (!obj.is_object()) {
    v.fail(path, "expected a PSD object");
    return std::nullopt;
  }
  const std::string kind = v.text(obj, "kind", path, "", true);
  if (kind == "arma1d") {
    v.check_keys(obj, path, {"kind", "b", "a", "sigma_in2", "sigma_s2"});
    const std::vector<double> b = v.number_list(obj, "b", path, true);
    const std::vector<double> a = v.number_list(obj, "a", path, true);
    const bool has_in = v.has(obj, "sigma_in2"), has_s = v.has(obj, "sigma_s2");
    if (has_in == has_s) {
      v.fail(path, "exactly one of sigma_in2 / sigma_s2 is required");
      return std::nullopt;
    }
    if (!v.errors.empty()) return std::nullopt;
    Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    Eigen::VectorXd av = Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
    try {
      if (has_in) return SpectralDensity::arma1d(bv, av, v.number(obj, "sigma_in2", path, 0.0, true));
      return SpectralDensity::arma1d_normalized(bv, av, v.number(obj, "sigma_s2", path, 0.0, true));
    } catch (const std::exception& e) {
      v.fail(path, e.what());
      return std::nullopt;
    }
  }
  if (kind == "pde2d") {
    v.check_keys(obj, path, {"kind", "a0", "ax", "ay", "sigma_q2"});
    const double a0 = v.number(obj, "a0", path, 0.0, true);
    const double ax = v.number(obj, "ax", path, 0.0, true);
    const double ay = v.number(obj, "ay", path, 0.0, true);
    const double sq = v.number(obj, "sigma_q2", path, 1.0, false);
    if (!v.errors.empty()) return std::nullopt;
    try {
      return SpectralDensity::pde2d(a0, ax, ay, sq);
    } catch (const std::exception& e) {
      v.fail(path, e.what());
      return std::nullopt;
    }
  }
  if (kind == "tabulated") {
    v.check_keys(obj, path, {"kind", "dim", "n_axis", "values"});
    const auto dim = static_cast<int>(v.number(obj, "dim", path, 1.0, false));
    const auto n_axis = static_cast<int>(v.number(obj, "n_axis", path, 0.0, true));
    const std::vector<double> vals = v.number_list(obj, "values", path, true);
    if (!v.errors.empty()) return std::nullopt;
    try {
      FrequencyGrid grid(dim, n_axis);
      return SpectralDensity::tabulated(grid,
                                        Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size()));
    } catch (const std::exception& e) {
      v.fail(path, e.what());
      return std::nullopt;
    }
  }
  if (!kind.empty()) v.fail(path + ".kind", "unknown PSD kind '" + kind + "'");
  return std::nullopt;
}

// sigma_v2 given directly or through the measurement SNR in dB.
double resolve_sigma_v2(Validator& v, const json& obj, const std::string& path,
                        const std::optional<SpectralDensity>& psd) {
  const bool has_v = v.has(obj, "sigma_v2"), has_m = v.has(obj, "snr_m_db");
  if (has_v == has_m) {
    v.fail(path, "exactly one of sigma_v2 / snr_m_db is required");
    return 1.0;
  }
  if (has_v) {
    const double s = v.number(obj, "sigma_v2", path, 1.0, true);
    if (!(s > 0.0)) v.fail(path + ".sigma_v2", "must be positive");
    return s;
  }
  const double db = v.number(obj, "snr_m_db", path, 0.0, true);
  if (!psd) return 1.0;
  return psd->variance() / std::pow(10.0, db / 10.0);
}

double snrc_to_sigma_w2(double Et, double snrc_db) { return Et / std::pow(10.0, snrc_db / 10.0); }

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV + manifest output.

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir_);
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + p.string());
    written_.push_back(p.string());
    return f;
  }

  void note_figure(const std::string& file, const std::string& experiment, const std::string& figure,
                   const std::string& x, const std::string& y, const std::string& x_scale,
                   const std::string& y_scale) {
    manifest_.push_back({{"file", file},
                         {"experiment", experiment},
                         {"figure", figure},
                         {"x_label", x},
                         {"y_label", y},
                         {"x_scale", x_scale},
                         {"y_scale", y_scale}});
  }

  void write_manifest() {
    json m;
    m["outputs"] = manifest_;
    auto f = open("manifest.json");
    f << m.dump(2) << "\n";
  }

  void discard_all() {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
  json manifest_ = json::array();
};

void csv_header(std::ofstream& f, const json& cfg, const std::vector<std::string>& columns) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (it->is_primitive()) f << "# " << it.key() << " = " << it->dump() << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
  f << "\n";
}

// ---------------------------------------------------------------------------
// Experiment context shared by the runners.

struct Context {
  json cfg;
  std::string name, label;
  RunOptions options;
  OutputSet* out = nullptr;
  SpectralDensity psd;
  double sigma_v2 = 1.0;
  double Et = 1.0;

  FrequencyGrid grid() const {
    FrequencyGrid g = FrequencyGrid::default_for(psd.dim());
    if (options.grid) g.n_axis = *options.grid;
    return g;
  }
};

struct ProfileChoice {
  ProfileKind kind;
  std::string name;
};

ProfileKind profile_kind_from(const std::string& s) {
  if (s == "cep") return ProfileKind::Cep;
  if (s == "sep") return ProfileKind::Sep;
  if (s == "oep") return ProfileKind::Oep;
  if (s == "onoff") return ProfileKind::OnOff;
  throw std::invalid_argument("unknown profile '" + s + "'");
}

// Exponent of one decentralized profile at one channel noise level.
struct ProfilePoint {
  double exponent = 0.0;
  double beta_star = 0.0;
};

ProfilePoint dd_exponent(const Context& ctx, ProfileKind kind, double beta, double sigma_w2,
                         const FrequencyGrid& grid) {
  EnergyProfile prof;
  switch (kind) {
    case ProfileKind::Cep:
      prof = profile_cep(ctx.psd, ctx.Et, ctx.sigma_v2, grid);
      break;
    case ProfileKind::Sep:
      prof = profile_sep(ctx.psd, ctx.Et, ctx.sigma_v2, grid);
      break;
    case ProfileKind::Oep:
      prof = solve_oep(ctx.psd, beta, ctx.Et, ctx.sigma_v2, sigma_w2, grid).profile;
      break;
    case ProfileKind::OnOff: {
      const OepSolution oep = solve_oep(ctx.psd, beta, ctx.Et, ctx.sigma_v2, sigma_w2, grid);
      prof = profile_onoff(ctx.psd, ctx.Et, ctx.sigma_v2, oep.profile);
      break;
    }
    default:
      throw std::invalid_argument("unsupported profile kind");
  }
  const SnrSpectrum snr = snr_spectrum_dd(ctx.psd, prof, ctx.sigma_v2, sigma_w2);
  return {kappa_m_alpha(snr), prof.beta_star};
}

// ---------------------------------------------------------------------------
// Runners.

void run_exponent_vs_snrc(Context& ctx) {
  Validator v;
  const Sweep sweep = sweep_block(v, ctx.cfg, "snrc_db", ctx.name, 0.25, true);
  if (!v.errors.empty()) throw std::invalid_argument(v.errors.front());
  const double beta = ctx.cfg.value("beta", 1.0);
  const FrequencyGrid grid = ctx.grid();

  std::vector<std::string> profiles;
  for (const auto& p : ctx.cfg["profiles"]) profiles.push_back(p.get<std::string>());

  for (const auto& pname : profiles) {
    const std::string fname = ctx.label + "_" + pname + ".csv";
    auto f = ctx.out->open(fname);
    csv_header(f, ctx.cfg, {"snr_c_db", "exponent", "beta_star"});
    if (pname == "cd") {
      const double kcd = kappa_m_alpha(snr_spectrum_cd(ctx.psd, ctx.sigma_v2, grid));
      for (double db : sweep.points())
        f << fmt_g(db) << "," << fmt_g(kcd) << "," << fmt_g(1.0) << "\n";
    } else {
      const ProfileKind kind = profile_kind_from(pname);
      for (double db : sweep.points()) {
        const ProfilePoint pt = dd_exponent(ctx, kind, beta, snrc_to_sigma_w2(ctx.Et, db), grid);
        f << fmt_g(db) << "," << fmt_g(pt.exponent) << "," << fmt_g(pt.beta_star) << "\n";
      }
    }
    ctx.out->note_figure(fname, ctx.name, "miss exponent versus channel SNR", "SNR_C [dB]",
                         "miss exponent", "linear", "log");
  }
}

void run_beta_star_vs_beta(Context& ctx) {
  Validator v;
  const Sweep sweep = sweep_block(v, ctx.cfg, "beta", ctx.name, 0.02, true);
  const std::vector<double> snrc = v.number_list(ctx.cfg, "snrc_db_list", ctx.name, true);
  if (!v.errors.empty()) throw std::invalid_argument(v.errors.front());
  const FrequencyGrid grid = ctx.grid();

  const std::string fname = ctx.label + ".csv";
  auto f = ctx.out->open(fname);
  csv_header(f, ctx.cfg, {"snr_c_db", "beta", "beta_star"});
  for (double db : snrc) {
    const double sw2 = snrc_to_sigma_w2(ctx.Et, db);
    for (double b : sweep.points()) {
      if (!(b > 0.0)) continue;
      const OepSolution sol = solve_oep(ctx.psd, std::min(b, 1.0), ctx.Et, ctx.sigma_v2, sw2, grid);
      f << fmt_g(db) << "," << fmt_g(std::min(b, 1.0)) << "," << fmt_g(sol.profile.beta_star) << "\n";
    }
  }
  ctx.out->note_figure(fname, ctx.name, "occupied bandwidth versus available bandwidth", "beta",
                       "beta*", "linear", "linear");
}

void run_energy_profile(Context& ctx) {
  Validator v;
  const std::vector<double> snrc = v.number_list(ctx.cfg, "snrc_db_list", ctx.name, true);
  if (!v.errors.empty()) throw std::invalid_argument(v.errors.front());
  const double beta = ctx.cfg.value("beta", 1.0);
  const FrequencyGrid grid = ctx.grid();

  for (double db : snrc) {
    const OepSolution sol =
        solve_oep(ctx.psd, beta, ctx.Et, ctx.sigma_v2, snrc_to_sigma_w2(ctx.Et, db), grid);
    std::string tag = fmt_g(db);
    for (auto& ch : tag) {
      if (ch == '-') ch = 'm';
      if (ch == '.') ch = 'p';
    }
    const std::string fname = ctx.label + "_snrc_" + tag + "db.csv";
    auto f = ctx.out->open(fname);
    csv_header(f, ctx.cfg, {"nu", "xi", "weight"});
    for (std::int64_t i = 0; i < grid.size(); ++i)
      f << fmt_g(grid.node(i)[0]) << "," << fmt_g(sol.profile.xi[i]) << ","
        << fmt_g(sol.profile.weights[i]) << "\n";
    ctx.out->note_figure(fname, ctx.name, "energy allocation versus frequency", "nu",
                         "xi", "linear", "linear");
  }
}

// Inverse reading of a monotone exponent curve at a target level.
double crossing_db(const std::vector<double>& dbs, const std::vector<double>& kappas, double target) {
  for (std::size_t i = 1; i < dbs.size(); ++i) {
    const double k0 = kappas[i - 1], k1 = kappas[i];
    if ((k0 <= target && target <= k1) || (k1 <= target && target <= k0)) {
      if (k0 == k1) return dbs[i - 1];
      const double t = (std::log(target) - std::log(k0)) / (std::log(k1) - std::log(k0));
      return dbs[i - 1] + t * (dbs[i] - dbs[i - 1]);
    }
  }
  std::ostringstream os;
  os << "target exponent " << target << " not crossed on the sweep [" << dbs.front() << ", "
     << dbs.back() << "] dB; widen snrc_db";
  throw std::runtime_error(os.str());
}

void run_energy_gap_table(Context& ctx) {
  Validator v;
  const Sweep sweep = sweep_block(v, ctx.cfg, "snrc_db", ctx.name, 0.25, true);
  const std::vector<double> targets = v.number_list(ctx.cfg, "targets", ctx.name, true);
  if (!v.errors.empty()) throw std::invalid_argument(v.errors.front());
  const FrequencyGrid grid = ctx.grid();
  const std::vector<double> dbs = sweep.points();

  std::vector<double> cep_curve;
  for (double db : dbs)
    cep_curve.push_back(
        dd_exponent(ctx, ProfileKind::Cep, 1.0, snrc_to_sigma_w2(ctx.Et, db), grid).exponent);

  const std::string fname = ctx.label + ".csv";
  auto f = ctx.out->open(fname);
  csv_header(f, ctx.cfg, {"profile", "beta", "target", "snrc_profile_db", "snrc_cep_db", "gap_db"});
  for (const auto& row : ctx.cfg["rows"]) {
    const std::string pname = row["profile"].get<std::string>();
    const double beta = row.value("beta", 1.0);
    const ProfileKind kind = profile_kind_from(pname);
    std::vector<double> curve;
    for (double db : dbs)
      curve.push_back(dd_exponent(ctx, kind, beta, snrc_to_sigma_w2(ctx.Et, db), grid).exponent);
    for (double target : targets) {
      const double s_prof = crossing_db(dbs, curve, target);
      const double s_cep = crossing_db(dbs, cep_curve, target);
      f << pname << "," << fmt_g(beta) << "," << fmt_g(target) << "," << fmt_g(s_prof) << ","
        << fmt_g(s_cep) << "," << fmt_g(s_cep - s_prof) << "\n";
    }
  }
  ctx.out->note_figure(fname, ctx.name, "energy saving of shaped allocations at fixed exponent",
                       "target exponent", "gap [dB]", "log", "linear");
}

void run_mc_2d(Context& ctx) {
  Validator v;
  const std::vector<double> axis = v.number_list(ctx.cfg, "axis_sizes", ctx.name, true);
  if (!v.errors.empty()) throw std::invalid_argument(v.errors.front());

  TrialConfig cfg;
  cfg.psd = ctx.psd;
  cfg.sigma_v2 = ctx.sigma_v2;
  cfg.Et = ctx.Et;
  cfg.sigma_w2 = snrc_to_sigma_w2(ctx.Et, ctx.cfg.value("snrc_db", 0.0));
  cfg.beta = ctx.cfg.value("beta", 1.0);
  cfg.profile = profile_kind_from(ctx.cfg.value("profile", std::string("cep")));
  cfg.alpha = ctx.cfg.value("alpha", 1e-2);
  cfg.trials = ctx.options.trials.value_or(ctx.cfg.value("trials", std::int64_t{10000}));
  cfg.seed = ctx.options.seed.value_or(ctx.cfg.value("seed", std::uint64_t{1}));
  cfg.streams = ctx.options.streams;
  cfg.strategies.clear();
  for (const auto& s : ctx.cfg["strategies"]) {
    const std::string name = s.get<std::string>();
    if (name == "cd") cfg.strategies.push_back(DetectorKind::Cd);
    else if (name == "pcs") cfg.strategies.push_back(DetectorKind::Pcs);
    else if (name == "pfs") cfg.strategies.push_back(DetectorKind::Pfs);
    else throw std::invalid_argument("unknown strategy '" + name + "'");
  }
  for (double a : axis) {
    const int ai = static_cast<int>(a);
    cfg.sizes.push_back({ai, ai});
  }

  const std::vector<McEstimate> ests = run_experiment(cfg);

  const std::string fname = ctx.label + "_estimates.csv";
  auto f = ctx.out->open(fname);
  csv_header(f, ctx.cfg,
             {"n", "strategy", "p_fa_hat", "p_m_hat", "exponent_hat", "stderr", "censored_flag",
              "seed"});
  for (const auto& e : ests) {
    const char* sname = e.strategy == DetectorKind::Cd ? "cd"
                        : e.strategy == DetectorKind::Pcs ? "pcs" : "pfs";
    f << e.n << "," << sname << "," << fmt_g(e.p_fa_hat) << "," << fmt_g(e.p_m_hat) << ","
      << fmt_g(e.exponent_hat) << "," << fmt_g(e.exponent_se) << "," << (e.censored ? 1 : 0) << ","
      << e.seed << "\n";
  }
  ctx.out->note_figure(fname, ctx.name, "finite-sample exponent versus sensor count", "n",
                       "exponent estimate", "linear", "linear");

  // Limit value for the same scenario.
  const FrequencyGrid grid = ctx.grid();
  EnergyProfile prof;
  if (cfg.profile == ProfileKind::Cep)
    prof = profile_cep(ctx.psd, ctx.Et, ctx.sigma_v2, grid);
  else if (cfg.profile == ProfileKind::Sep)
    prof = profile_sep(ctx.psd, ctx.Et, ctx.sigma_v2, grid);
  else
    prof = solve_oep(ctx.psd, cfg.beta, ctx.Et, ctx.sigma_v2, cfg.sigma_w2, grid).profile;
  const double theory = kappa_m_alpha(snr_spectrum_dd(ctx.psd, prof, ctx.sigma_v2, cfg.sigma_w2));
  const std::string tname = ctx.label + "_theory.csv";
  auto tf = ctx.out->open(tname);
  csv_header(tf, ctx.cfg, {"exponent"});
  tf << fmt_g(theory) << "\n";
  ctx.out->note_figure(tname, ctx.name, "finite-sample exponent versus sensor count", "n",
                       "limit exponent", "linear", "linear");
}

void run_toeplitz_convergence(Context& ctx) {
  Validator v;
  const std::vector<double> ns = v.number_list(ctx.cfg, "n_list", ctx.name, true);
  if (!v.errors.empty()) throw std::invalid_argument(v.errors.front());
  const FrequencyGrid grid = ctx.grid();
  const double sv2 = ctx.sigma_v2;
  const auto F = [sv2](double x) { return std::log1p(std::max(x, 0.0) / sv2); };

  const std::string fname = ctx.label + ".csv";
  auto f = ctx.out->open(fname);
  csv_header(f, ctx.cfg, {"n", "finite_average", "limit_integral", "gap"});
  for (double nd : ns) {
    const DistributionCheck chk = toeplitz_distribution_check(ctx.psd, F, static_cast<int>(nd), grid);
    f << static_cast<int>(nd) << "," << fmt_g(chk.finite_average) << ","
      << fmt_g(chk.limit_integral) << "," << fmt_g(chk.gap) << "\n";
  }
  ctx.out->note_figure(fname, ctx.name, "eigenvalue functional convergence", "n",
                       "|average - integral|", "linear", "log");
}

// ---------------------------------------------------------------------------
// Registry and validation entry points.

const std::set<std::string> kCommonKeys = {"experiment", "label", "psd", "et"};

void validate_experiment(Validator& v, const json& e, const std::string& path) {
  if (!e.is_object()) {
    v.fail(path, "expected an experiment object");
    return;
  }
  const std::string name = v.text(e, "experiment", path, "", true);
  const auto& names = experiment_names();
  if (!name.empty() && std::find(names.begin(), names.end(), name) == names.end()) {
    v.fail(path + ".experiment", "unknown experiment '" + name + "'");
    return;
  }
  if (name.empty()) return;

  std::optional<SpectralDensity> psd;
  if (e.contains("psd"))
    psd = psd_from_json(v, e["psd"], path + ".psd");
  else
    v.fail(path + ".psd", "missing required PSD block");

  std::set<std::string> allowed = kCommonKeys;
  if (name == "exponent-vs-snrc") {
    allowed.insert({"sigma_v2", "snr_m_db", "snrc_db", "profiles", "beta"});
    v.check_keys(e, path, allowed);
    (void)resolve_sigma_v2(v, e, path, psd);
    (void)sweep_block(v, e, "snrc_db", path, 0.25, true);
    if (!e.contains("profiles") || !e["profiles"].is_array() || e["profiles"].empty()) {
      v.fail(path + ".profiles", "missing required array of profile names");
    } else {
      bool needs_beta = false;
      for (const auto& p : e["profiles"]) {
        if (!p.is_string()) {
          v.fail(path + ".profiles", "expected strings");
          continue;
        }
        const std::string pn = p.get<std::string>();
        if (pn != "cd" && pn != "cep" && pn != "sep" && pn != "oep" && pn != "onoff")
          v.fail(path + ".profiles", "unknown profile '" + pn + "'");
        needs_beta |= pn == "oep" || pn == "onoff";
      }
      if (needs_beta && !e.contains("beta")) v.fail(path + ".beta", "required when oep/onoff is used");
    }
    if (e.contains("beta")) {
      const double b = v.number(e, "beta", path, 1.0, false);
      if (!(b > 0.0 && b <= 1.0)) v.fail(path + ".beta", "must lie in (0, 1]");
    }
    if (psd && psd->dim() != 1) v.fail(path + ".psd", "needs a 1-D PSD");
  } else if (name == "beta-star-vs-beta") {
    allowed.insert({"sigma_v2", "snr_m_db", "snrc_db_list", "beta"});
    v.check_keys(e, path, allowed);
    (void)resolve_sigma_v2(v, e, path, psd);
    (void)v.number_list(e, "snrc_db_list", path, true);
    (void)sweep_block(v, e, "beta", path, 0.02, true);
    if (psd && psd->dim() != 1) v.fail(path + ".psd", "needs a 1-D PSD");
  } else if (name == "energy-profile") {
    allowed.insert({"sigma_v2", "snr_m_db", "snrc_db_list", "beta"});
    v.check_keys(e, path, allowed);
    (void)resolve_sigma_v2(v, e, path, psd);
    (void)v.number_list(e, "snrc_db_list", path, true);
    if (psd && psd->dim() != 1) v.fail(path + ".psd", "needs a 1-D PSD");
  } else if (name == "energy-gap-table") {
    allowed.insert({"sigma_v2", "snr_m_db", "snrc_db", "rows", "targets"});
    v.check_keys(e, path, allowed);
    (void)resolve_sigma_v2(v, e, path, psd);
    (void)sweep_block(v, e, "snrc_db", path, 0.25, true);
    (void)v.number_list(e, "targets", path, true);
    if (!e.contains("rows") || !e["rows"].is_array() || e["rows"].empty()) {
      v.fail(path + ".rows", "missing required array of {profile, beta} rows");
    } else {
      int i = 0;
      for (const auto& row : e["rows"]) {
        const std::string rp = path + ".rows[" + std::to_string(i++) + "]";
        if (!row.is_object()) {
          v.fail(rp, "expected an object");
          continue;
        }
        v.check_keys(row, rp, {"profile", "beta"});
        const std::string pn = v.text(row, "profile", rp, "", true);
        if (!pn.empty() && pn != "cep" && pn != "sep" && pn != "oep" && pn != "onoff")
          v.fail(rp + ".profile", "unknown profile '" + pn + "'");
        if (row.contains("beta")) {
          const double b = v.number(row, "beta", rp, 1.0, false);
          if (!(b > 0.0 && b <= 1.0)) v.fail(rp + ".beta", "must lie in (0, 1]");
        }
      }
    }
    if (psd && psd->dim() != 1) v.fail(path + ".psd", "needs a 1-D PSD");
  } else if (name == "mc-2d") {
    allowed.insert({"sigma_v2", "snr_m_db", "snrc_db", "alpha", "axis_sizes", "trials",
                    "strategies", "seed", "streams", "profile", "beta"});
    v.check_keys(e, path, allowed);
    (void)resolve_sigma_v2(v, e, path, psd);
    if (!e.contains("snrc_db") || !e["snrc_db"].is_number())
      v.fail(path + ".snrc_db", "missing required number (dB)");
    const std::vector<double> axis = v.number_list(e, "axis_sizes", path, true);
    for (double a : axis)
      if (a < 1.0 || a != std::floor(a)) v.fail(path + ".axis_sizes", "entries must be positive integers");
    if (!e.contains("strategies") || !e["strategies"].is_array() || e["strategies"].empty()) {
      v.fail(path + ".strategies", "missing required array");
    } else {
      for (const auto& s : e["strategies"]) {
        const std::string sn = s.is_string() ? s.get<std::string>() : "";
        if (sn != "cd" && sn != "pcs" && sn != "pfs")
          v.fail(path + ".strategies", "entries must be cd, pcs or pfs");
      }
    }
    if (e.contains("alpha")) {
      const double a = v.number(e, "alpha", path, 1e-2, false);
      if (!(a > 0.0 && a < 1.0)) v.fail(path + ".alpha", "must lie in (0, 1)");
    }
    if (psd && psd->kind() != PsdKind::Pde2d) v.fail(path + ".psd", "needs a pde2d PSD");
  } else if (name == "toeplitz-convergence") {
    allowed.insert({"sigma_v2", "snr_m_db", "n_list"});
    v.check_keys(e, path, allowed);
    (void)resolve_sigma_v2(v, e, path, psd);
    const std::vector<double> ns = v.number_list(e, "n_list", path, true);
    for (double nd : ns)
      if (nd < 1.0 || nd != std::floor(nd)) v.fail(path + ".n_list", "entries must be positive integers");
    if (psd && psd->dim() != 1) v.fail(path + ".psd", "needs a 1-D PSD");
  }

  if (e.contains("et")) {
    const double et = v.number(e, "et", path, 1.0, false);
    if (!(et > 0.0)) v.fail(path + ".et", "must be positive");
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "exponent-vs-snrc", "beta-star-vs-beta", "energy-profile",
      "energy-gap-table", "mc-2d",             "toeplitz-convergence"};
  return names;
}

std::vector<ExperimentSpec> parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }

  std::vector<json> blocks;
  Validator v;
  if (root.is_object() && root.contains("experiments")) {
    for (auto it = root.begin(); it != root.end(); ++it)
      if (it.key() != "experiments") v.fail(it.key(), "unknown key");
    if (!root["experiments"].is_array() || root["experiments"].empty())
      v.fail("experiments", "expected a non-empty array");
    else
      for (const auto& e : root["experiments"]) blocks.push_back(e);
  } else {
    blocks.push_back(root);
  }

  std::vector<ExperimentSpec> specs;
  int i = 0;
  for (const auto& e : blocks) {
    const std::string p = "experiments[" + std::to_string(i++) + "]";
    validate_experiment(v, e, p);
    if (e.is_object() && e.contains("experiment") && e["experiment"].is_string()) {
      ExperimentSpec spec;
      spec.name = e["experiment"].get<std::string>();
      spec.label = e.value("label", spec.name);
      spec.config_json = e.dump();
      specs.push_back(std::move(spec));
    }
  }
  if (!v.errors.empty()) {
    std::ostringstream os;
    os << "invalid config " << path << ":";
    for (const auto& err : v.errors) os << "\n  " << err;
    throw std::invalid_argument(os.str());
  }
  return specs;
}

std::vector<std::string> run_experiments(const std::vector<ExperimentSpec>& specs,
                                         const RunOptions& options) {
  OutputSet out{fs::path(options.output_dir)};
  try {
    for (const auto& spec : specs) {
      if (options.filter && spec.name != *options.filter && spec.label != *options.filter) continue;
      Context ctx;
      ctx.cfg = json::parse(spec.config_json);
      ctx.name = spec.name;
      ctx.label = spec.label;
      ctx.options = options;
      ctx.out = &out;
      {
        Validator v;
        auto psd = psd_from_json(v, ctx.cfg["psd"], spec.label + ".psd");
        if (!psd) throw std::invalid_argument("invalid PSD in " + spec.label);
        ctx.psd = *psd;
        ctx.Et = ctx.cfg.value("et", 1.0);
        ctx.sigma_v2 = resolve_sigma_v2(v, ctx.cfg, spec.label, psd);
        if (!v.errors.empty()) throw std::invalid_argument(v.errors.front());
      }
      if (spec.name == "exponent-vs-snrc") run_exponent_vs_snrc(ctx);
      else if (spec.name == "beta-star-vs-beta") run_beta_star_vs_beta(ctx);
      else if (spec.name == "energy-profile") run_energy_profile(ctx);
      else if (spec.name == "energy-gap-table") run_energy_gap_table(ctx);
      else if (spec.name == "mc-2d") run_mc_2d(ctx);
      else if (spec.name == "toeplitz-convergence") run_toeplitz_convergence(ctx);
      else throw std::invalid_argument("unknown experiment " + spec.name);
    }
    out.write_manifest();
  } catch (...) {
    out.discard_all();
    throw;
  }
  return out.written();
}

}  // namespace specdet
