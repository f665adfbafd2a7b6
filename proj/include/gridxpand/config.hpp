#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "gridxpand/assessment.hpp"

namespace gridxpand {

// Settings shared by the command-line subcommands. A config file supplies
// defaults; command-line flags override them.
struct RunConfig {
  std::filesystem::path feeder;
  std::filesystem::path costs;  // directory with costs.csv and conductors.csv
  std::string region;           // empty: the feeder's own
  std::string scenario = "base";
  bool cs = false;
  std::string siting = "optimal";
  std::uint64_t seed = 1;
  std::filesystem::path out;
  std::filesystem::path trace;
  std::filesystem::path manifest;
  int threads = 0;

  double gap = 1e-4;
  long node_limit = 1'000'000;
  double scenario_step = 0.05;
  int scenario_max_iter = 200;
  double loading_threshold = 0.9;
  double voltage_margin = 0.01;
  int loop_max_iterations = 25;
};

// Parses "key = value" lines grouped under "[section]" headers into
// "section.key" entries. '#' starts a comment; values may be double-quoted.
std::map<std::string, std::string> parse_config_text(std::string_view text);

// Applies parsed entries to `cfg`. Keys are solver.gap, solver.node_limit,
// run.{feeder,costs,region,scenario,cs,siting,seed,out,trace},
// scenario.{step,max_iter}, screening.{loading,voltage_margin},
// loop.max_iterations, fleet.{manifest,threads}; the "run." prefix may be
// omitted. Relative paths resolve against `base_dir`. Unknown keys throw.
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& entries,
                  const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

// Library options derived from the configuration.
AssessOptions assess_options(const RunConfig& cfg);

}  // namespace gridxpand
