// Command line front end: validate a config, run its experiments, write CSVs.
#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <iostream>

#include "specdet/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral detection experiment runner"};

  std::string config_path;
  std::string output_dir;
  std::string only;
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  int grid = 0;
  int streams = 1;

  app.add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  auto* out_opt = app.add_option("-o,--output-dir", output_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "override the Monte Carlo seed");
  auto* trials_opt = app.add_option("--trials", trials, "override the Monte Carlo trial count");
  auto* grid_opt = app.add_option("--grid", grid, "override the frequency grid size per axis");
  app.add_option("--streams", streams, "worker threads for Monte Carlo trials")
      ->check(CLI::PositiveNumber);
  auto* only_opt = app.add_option("--only", only, "run a single experiment (name or label)");

  CLI11_PARSE(app, argc, argv);

  specdet::RunOptions options;
  if (out_opt->count()) {
    options.output_dir = output_dir;
  } else if (const char* root = std::getenv("SPECDET_OUTPUT_ROOT")) {
    options.output_dir = root;
  }
  if (seed_opt->count()) options.seed = seed;
  if (trials_opt->count()) options.trials = trials;
  if (grid_opt->count()) options.grid = grid;
  if (only_opt->count()) options.filter = only;
  options.streams = streams;

  try {
    const auto specs = specdet::parse_config(config_path);
    const auto written = specdet::run_experiments(specs, options);
    for (const auto& p : written) std::cout << p << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
