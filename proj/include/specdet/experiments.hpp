#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specdet/montecarlo.hpp"
#include "specdet/spectra.hpp"

namespace specdet {

// One experiment parsed from a config file.  parameters keeps the raw
// key/value pairs for CSV headers and the manifest.
struct ExperimentSpec {
  std::string name;   // one of the registered experiment names
  std::string label;  // output file stem
  std::string config_json;  // canonical serialisation of the experiment block
};

const std::vector<std::string>& experiment_names();

// Parses and validates a config file (a single experiment object or
// {"experiments": [...]}).  Every validation problem is collected; on any
// error an std::invalid_argument carrying the full list is thrown.
std::vector<ExperimentSpec> parse_config(const std::string& path);

struct RunOptions {
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<int> grid;
  std::optional<std::string> filter;  // run only experiments whose name or label matches
  int streams = 1;
};

// Executes the experiments and writes their CSV outputs plus a manifest
// describing every file.  Partial outputs are removed if a run fails.
// Returns the paths written.
std::vector<std::string> run_experiments(const std::vector<ExperimentSpec>& specs,
                                         const RunOptions& options);

}  // namespace specdet
