#pragma once

// Experiment manifests, the subcommand dispatcher, and the command-line
// front end of the `modquad` binary.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "modquad/io.hpp"

namespace modquad {

struct ExperimentManifest {
  std::string command;
  Json parameters = Json::object();
  std::uint64_t seed = 1;
  /// Overrides of the default budgets; see default_budgets().
  Json budgets = Json::object();
  /// 0 means the available hardware parallelism.
  unsigned workers = 0;
  std::string output_path;
  bool dry_run = false;

  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

Json to_json(const ExperimentManifest& m);
ExperimentManifest manifest_from_json(const Json& j);

struct RunReport {
  ExperimentManifest manifest;
  Json results;
  Json timings;
  Json versions;
};

Json to_json(const RunReport& r);

/// Budget names and their defaults.
Json default_budgets();

/// The defaults overridden by `manifest.budgets`; unknown names are a
/// precondition error.
Json resolve_budgets(const ExperimentManifest& manifest);

const std::vector<std::string>& subcommands();

/// Executes one manifest. Module errors propagate as exceptions.
RunReport run(const ExperimentManifest& manifest);

/// Process exit code for an exception escaping run().
int exit_code_for(const std::exception& e);

/// The full command-line program; returns the process exit code.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace modquad
