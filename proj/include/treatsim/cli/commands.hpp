#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "treatsim/cli/run_config.hpp"
#include "treatsim/cohort.hpp"
#include "treatsim/error.hpp"

namespace treatsim::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct FitArgs {
  std::filesystem::path input_csv;
  ModelClass model_class = ModelClass::GlobalAverage;
  std::filesystem::path output;            // model file
  std::filesystem::path diagnostics;       // defaults to <output>.diag
};

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  bool verbose = false;               // per-episode records in results.json
};

struct SweepArgs {
  std::filesystem::path config;
  std::filesystem::path output_dir;
  std::vector<double> osf_values;            // empty: 0..15 step 1
  std::vector<BackupMode> modes{BackupMode::Normal};
  std::string construct;                     // empty: first MDP construct
  std::optional<std::uint64_t> seed;
};

struct ExportArgs {
  std::filesystem::path config;
  std::filesystem::path output_csv;
  std::string construct;  // empty: always-treat episodes
  std::optional<std::uint64_t> seed;
};

/// Models and population shared by every construct of one run.
struct RunContext {
  std::shared_ptr<const TransitionModel> world;
  PlannerModels planner_models;
  std::vector<PatientAgent> population;
};

std::shared_ptr<const TransitionModel> load_world_model(const RunConfig& cfg);

/// Trajectories the planner models are fitted from: the configured CSV, or a
/// synthetic always-treat cohort drawn from the world model.
TrajectoryDataset training_data(const RunConfig& cfg, const TransitionModel& world);

RunContext prepare_run(const RunConfig& cfg);

TransitionModel cmd_fit(const FitArgs& args);

std::vector<std::pair<ConstructSpec, ConstructResult>> cmd_simulate(const SimulateArgs& args);

struct SweepRow {
  BackupMode mode;
  double osf;
  ConstructResult result;
};
std::vector<SweepRow> cmd_sweep(const SweepArgs& args);

void cmd_export(const ExportArgs& args);

/// Process exit code for an error category (0 is success).
int exit_code(ErrorKind kind);

}  // namespace treatsim::cli
