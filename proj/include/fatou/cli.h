#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fatou/maps.h"
#include "json.hpp"

namespace fatou::cli {

using nlohmann::json;

enum class Experiment { Lyapunov, Hmeasure, Backward, Tower, Periodic, ReturnMap, RhoCheck, Inner };

struct ExperimentInfo {
  Experiment id;
  const char* name;
  const char* summary;
};

const std::vector<ExperimentInfo>& experiments();
const char* experiment_name(Experiment e);

// A validated scenario. `map` is the canonical map table (null when absent) and
// `params` has every default filled in.
struct Scenario {
  Experiment experiment = Experiment::Lyapunov;
  json map;
  json params;
  std::uint64_t seed = 0;
  std::string output_dir = "output";
};

// YAML (or JSON) text; unknown keys and ill-typed values raise SchemaError with the key path.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Canonical text without output_dir; parse_scenario(serialize_scenario(s)) == s up to output_dir.
std::string serialize_scenario(const Scenario& s);
// Hex SHA-256 of serialize_scenario.
std::string scenario_digest(const Scenario& s);

Map build_map(const json& table);

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  std::string scenario_digest;
  double wall_time = 0.0;
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;
  json results;

  bool all_pass() const;
};

// Writes results.json and samples.csv under output_dir (or $FATOULAB_OUTPUT_DIR).
RunReport run_scenario(const Scenario& s);

// Column header of samples.csv for an experiment and its params.
std::vector<std::string> csv_columns(Experiment e, const json& params);

}  // namespace fatou::cli
