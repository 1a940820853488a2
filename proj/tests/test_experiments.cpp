#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "specdet/experiments.hpp"

using namespace specdet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& stem) {
    path = fs::temp_directory_path() / (stem + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
  return p.string();
}

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

const char* kBroadPsd = R"({"kind": "arma1d",
  "b": [0.39, 0, -0.78, 0, 0.39], "a": [1, 0, -0.37, 0, 0.19], "sigma_s2": 1.0})";

}  // namespace

TEST_CASE("the experiment registry is complete") {
  const auto& names = experiment_names();
  CHECK(names.size() == 6);
  for (const char* n : {"exponent-vs-snrc", "beta-star-vs-beta", "energy-profile",
                        "energy-gap-table", "mc-2d", "toeplitz-convergence"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
}

TEST_CASE("a minimal config parses with defaulted label") {
  TempDir tmp("specdet-parse");
  std::ostringstream cfg;
  cfg << R"({"experiment": "toeplitz-convergence", "psd": )" << kBroadPsd
      << R"(, "snr_m_db": 5, "n_list": [16, 32]})";
  const std::string path = write_file(tmp.path / "ok.json", cfg.str());
  const auto specs = parse_config(path);
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].name == "toeplitz-convergence");
  CHECK(specs[0].label == "toeplitz-convergence");
}

TEST_CASE("validation reports every problem at once") {
  TempDir tmp("specdet-invalid");
  const std::string path = write_file(tmp.path / "bad.json", R"({"experiments": [
    {"experiment": "toeplitz-convergence",
     "psd": {"kind": "arma1d", "b": [1], "a": [1]},
     "snr_m_db": 5, "n_list": [16], "bogus": 1},
    {"experiment": "no-such-experiment"}
  ]})");
  try {
    parse_config(path);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sigma_in2") != std::string::npos);   // psd missing its power key
    CHECK(msg.find("bogus") != std::string::npos);       // unknown key
    CHECK(msg.find("no-such-experiment") != std::string::npos);
  }
}

TEST_CASE("missing and malformed files fail cleanly") {
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), std::invalid_argument);
  TempDir tmp("specdet-malformed");
  const std::string path = write_file(tmp.path / "x.json", "{not json");
  CHECK_THROWS_AS(parse_config(path), std::invalid_argument);
}

TEST_CASE("runner writes csv files and a manifest") {
  TempDir tmp("specdet-run");
  std::ostringstream cfg;
  cfg << R"({"experiment": "toeplitz-convergence", "label": "conv", "psd": )" << kBroadPsd
      << R"(, "snr_m_db": 5, "n_list": [16, 32, 64]})";
  const std::string path = write_file(tmp.path / "conv.json", cfg.str());
  RunOptions opt;
  opt.output_dir = (tmp.path / "out").string();
  opt.grid = 512;
  const auto written = run_experiments(parse_config(path), opt);
  REQUIRE(written.size() == 2);

  const std::string csv = slurp((tmp.path / "out" / "conv.csv").string());
  CHECK(csv.rfind("# ", 0) == 0);  // parameter header lines first
  CHECK(csv.find("n,finite_average,limit_integral,gap") != std::string::npos);
  // three data rows
  std::istringstream is(csv);
  std::string line;
  int data_rows = 0;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'n') ++data_rows;
  CHECK(data_rows == 3);

  const std::string manifest = slurp((tmp.path / "out" / "manifest.json").string());
  CHECK(manifest.find("conv.csv") != std::string::npos);
  CHECK(manifest.find("x_label") != std::string::npos);
}

TEST_CASE("analytic experiments rerun byte for byte") {
  TempDir tmp("specdet-repeat");
  std::ostringstream cfg;
  cfg << R"({"experiment": "exponent-vs-snrc", "label": "exp", "psd": )" << kBroadPsd
      << R"(, "snr_m_db": 5, "snrc_db": {"from": -4, "to": 4, "step": 2},
          "profiles": ["cd", "cep", "oep"], "beta": 0.6})";
  const std::string path = write_file(tmp.path / "exp.json", cfg.str());
  const auto specs = parse_config(path);
  RunOptions a, b;
  a.output_dir = (tmp.path / "a").string();
  b.output_dir = (tmp.path / "b").string();
  a.grid = b.grid = 512;
  run_experiments(specs, a);
  run_experiments(specs, b);
  for (const char* f : {"exp_cd.csv", "exp_cep.csv", "exp_oep.csv"}) {
    const std::string fa = slurp((tmp.path / "a" / f).string());
    CHECK(!fa.empty());
    CHECK(fa == slurp((tmp.path / "b" / f).string()));
  }
}

TEST_CASE("failed runs leave no partial outputs") {
  TempDir tmp("specdet-cleanup");
  std::ostringstream cfg;
  // the target exponent is far beyond anything the sweep can reach
  cfg << R"({"experiments": [
    {"experiment": "toeplitz-convergence", "label": "first", "psd": )"
      << kBroadPsd << R"(, "snr_m_db": 5, "n_list": [16]},
    {"experiment": "energy-gap-table", "label": "gap", "psd": )" << kBroadPsd
      << R"(, "snr_m_db": 5, "snrc_db": {"from": -2, "to": 2, "step": 2},
     "targets": [1e9], "rows": [{"profile": "sep"}]}]})";
  const std::string path = write_file(tmp.path / "cfg.json", cfg.str());
  RunOptions opt;
  opt.output_dir = (tmp.path / "out").string();
  opt.grid = 512;
  CHECK_THROWS_AS(run_experiments(parse_config(path), opt), std::runtime_error);
  CHECK(!fs::exists(tmp.path / "out" / "first.csv"));
  CHECK(!fs::exists(tmp.path / "out" / "manifest.json"));
}

TEST_CASE("the filter narrows a multi experiment config") {
  TempDir tmp("specdet-filter");
  std::ostringstream cfg;
  cfg << R"({"experiments": [
    {"experiment": "toeplitz-convergence", "label": "one", "psd": )"
      << kBroadPsd << R"(, "snr_m_db": 5, "n_list": [16]},
    {"experiment": "toeplitz-convergence", "label": "two", "psd": )"
      << kBroadPsd << R"(, "snr_m_db": 5, "n_list": [16]}]})";
  const std::string path = write_file(tmp.path / "cfg.json", cfg.str());
  RunOptions opt;
  opt.output_dir = (tmp.path / "out").string();
  opt.grid = 512;
  opt.filter = "two";
  run_experiments(parse_config(path), opt);
  CHECK(!fs::exists(tmp.path / "out" / "one.csv"));
  CHECK(fs::exists(tmp.path / "out" / "two.csv"));
}
