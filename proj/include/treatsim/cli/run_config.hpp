#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "treatsim/cohort.hpp"
#include "treatsim/policies.hpp"
#include "treatsim/world.hpp"

namespace treatsim::cli {

/// Where planner models come from when a construct asks for a class.
enum class PlannerSource {
  World,  // reuse the world model for its own class, fit the others
  Fit,    // always fit from training trajectories
};

/// Everything needed to reproduce a run. Parsed from a flat `key = value`
/// file; each `[construct]` header opens a new construct block.
struct RunConfig {
  SimulationConfig sim;
  std::string world_model = "reference:global";  // "reference:<class>" or a model file
  PlannerSource planner_source = PlannerSource::World;
  int training_patients = 2000;
  std::string training_csv;  // optional; replaces the synthetic training cohort
  PlannerTuning tuning;
  std::vector<ConstructSpec> constructs;
  std::filesystem::path base_dir;  // relative paths resolve against this

  void validate() const;
};

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text form; parsing it yields an equivalent RunConfig.
std::string format_run_config(const RunConfig& cfg);

/// Comma-separated list or `start:stop:step` range (inclusive).
std::vector<double> parse_osf_list(std::string_view text);

}  // namespace treatsim::cli
