#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fatou/cli.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdictFailure = 2;

int report_error(const fatou::Error& e) {
  std::cerr << "error [" << fatou::errc_name(e.code()) << "]: " << e.what();
  if (e.index() >= 0) std::cerr << " (index " << e.index() << ")";
  std::cerr << "\n";
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on boundary dynamics of Fatou components"};
  app.require_subcommand(1);

  std::string run_path;
  CLI::App* run = app.add_subcommand("run", "run a scenario and write results.json and samples.csv");
  run->add_option("scenario", run_path, "scenario file")->required()->check(CLI::ExistingFile);

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a scenario against its experiment schema");
  validate->add_option("scenario", validate_path, "scenario file")->required()->check(CLI::ExistingFile);

  CLI::App* list = app.add_subcommand("list-experiments", "list experiments and their CSV columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (*list) {
      for (const auto& info : fatou::cli::experiments()) {
        std::cout << info.name << "\n  " << info.summary << "\n  columns:";
        for (const auto& c : fatou::cli::csv_columns(info.id, fatou::cli::json::object())) std::cout << " " << c;
        std::cout << "\n";
      }
      return kExitPass;
    }
    if (*validate) {
      const fatou::cli::Scenario s = fatou::cli::load_scenario(validate_path);
      std::cout << "ok " << fatou::cli::experiment_name(s.experiment) << " " << fatou::cli::scenario_digest(s) << "\n";
      return kExitPass;
    }
    const fatou::cli::Scenario s = fatou::cli::load_scenario(run_path);
    const fatou::cli::RunReport r = fatou::cli::run_scenario(s);
    for (const auto& v : r.verdicts) {
      std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
    }
    for (const auto& a : r.artifacts) std::cout << "wrote " << a << "\n";
    std::printf("digest %s  wall %.2fs\n", r.scenario_digest.c_str(), r.wall_time);
    return r.all_pass() ? kExitPass : kExitVerdictFailure;
  } catch (const fatou::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
