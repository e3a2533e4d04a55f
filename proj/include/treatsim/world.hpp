#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "treatsim/belief.hpp"
#include "treatsim/domain.hpp"
#include "treatsim/policies.hpp"
#include "treatsim/transition_model.hpp"
#include "treatsim/utility.hpp"

namespace treatsim {

struct SimulationConfig {
  ScaleConfig scale;
  int population_size = 500;
  double p_missing = 0.3;
  std::uint64_t seed = 0;
  double baseline_mean = 20.0;
  double baseline_std = 6.0;

  void validate() const;
};

/// Ground-truth patient. Only the world simulator reads `true_score`.
struct PatientAgent {
  int patient_id = 0;
  OutcomeScore baseline_score{};
  OutcomeScore true_score{};
  OutcomeScore previous_true_score{};
  std::shared_ptr<const TransitionModel> world_model;
  std::uint64_t seed = 0;  // run seed the per-session streams derive from
  int replication = 0;     // selects missingness and coin streams
  int sessions_done = 0;

  /// Conditioning bin of the world model for the next treatment step.
  DeltaBin world_conditioning(const ScaleConfig& cfg) const;
};

struct SessionRecord {
  Action action = Action::Treat;
  OutcomeScore true_score_after{};
  Observation observation = Observation::missing();
  double cost = 0.0;
};

struct EpisodeState {
  PatientAgent patient;
  std::vector<SessionRecord> sessions;  // treatment sessions only
  bool terminated = false;
  EpisodeOutcome outcome;
};

struct StepResult {
  OutcomeScore true_score{};
  Observation observation = Observation::missing();
  double cost = 0.0;
};

/// Built-in synthetic world dynamics used in place of clinical data.
TransitionModel reference_model(ModelClass model_class);

std::vector<PatientAgent> generate_population(const SimulationConfig& cfg,
                                              std::shared_ptr<const TransitionModel> world_model);

/// Samples the truncated Gaussian of `bin` so the change always lands in it.
double sample_bin_effect(DeltaBin bin, const EffectParams& effect, const BinEdges& edges,
                         RandomStream& rng);

/// Advances the patient by one action. Stop leaves the score unchanged at no
/// cost; Treat samples a next bin and a continuous change from the world model.
StepResult step_world(PatientAgent& agent, Action a, const SimulationConfig& cfg);

struct EpisodeOptions {
  ObservationModel obs_model = ObservationModel::identity();
  PlannerTuning tuning;
};

EpisodeState run_episode(PatientAgent agent, const PolicySpec& policy,
                         const TransitionModel* planner_model, const SimulationConfig& cfg,
                         const EpisodeOptions& options = {});

/// Replays a recorded trajectory: recorded session k is the reading after k
/// treatments, absent sessions count as missing. The episode also ends when
/// the record runs out. The final delta uses the last observed reading.
/// Throws Error(InvalidInput) if the baseline reading is missing.
EpisodeState replay_episode(const Trajectory& record, int patient_id, const PolicySpec& policy,
                            const TransitionModel* planner_model, const SimulationConfig& cfg,
                            const EpisodeOptions& options = {});

/// Converts episodes to trajectories (session 0 is the baseline reading).
TrajectoryDataset to_dataset(const std::vector<EpisodeState>& episodes);

}  // namespace treatsim
