#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "treatsim/belief.hpp"
#include "treatsim/planner.hpp"
#include "treatsim/rng.hpp"
#include "treatsim/transition_model.hpp"

namespace treatsim {

enum class PolicyKind : std::uint8_t { HardStop, RawEffect, MaxImprove, Probabilistic, Mdp };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view text);

struct PolicySpec {
  PolicyKind kind = PolicyKind::RawEffect;
  int stop_after = 3;                  // HardStop only
  BackupMode mode = BackupMode::Normal;  // Mdp only
  double osf = 0.0;                    // Mdp only
  ModelClass model_class = ModelClass::GlobalAverage;

  bool needs_model() const;
  /// Throws Error(Config), e.g. for an MDP over a zeroth-order model.
  void validate() const;
  std::string label() const;
};

/// What a policy may look at. The latent score is deliberately absent.
struct DecisionContext {
  const Belief& belief;
  int session_index = 0;
  double accumulated_cost = 0.0;
  RandomStream* coins = nullptr;  // required by Probabilistic
};

/// Planner knobs that are not part of the policy itself.
struct PlannerTuning {
  double osf_scale = 1.0;
  double delta_max_floor = 1.0;
  std::size_t node_budget = 5'000'000;
};

/// Probability mass on the two improvement bins of the predicted next step.
double improvement_probability(const Belief& b, const TransitionModel& model);

/// Modal bin of the predicted next step; ties go to the better bin.
DeltaBin modal_next_bin(const Belief& b, const TransitionModel& model);

Action decide(const PolicySpec& policy, const DecisionContext& ctx, const TransitionModel* model,
              const ScaleConfig& cfg, const PlannerTuning& tuning = {});

}  // namespace treatsim
