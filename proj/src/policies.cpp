#include "treatsim/policies.hpp"

#include <fmt/format.h>

#include "treatsim/error.hpp"

namespace treatsim {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::HardStop: return "HardStop";
    case PolicyKind::RawEffect: return "RawEffect";
    case PolicyKind::MaxImprove: return "MaxImprove";
    case PolicyKind::Probabilistic: return "Probabilistic";
    case PolicyKind::Mdp: return "Mdp";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view text) {
  if (text == "HardStop" || text == "hard_stop") return PolicyKind::HardStop;
  if (text == "RawEffect" || text == "raw_effect") return PolicyKind::RawEffect;
  if (text == "MaxImprove" || text == "max_improve") return PolicyKind::MaxImprove;
  if (text == "Probabilistic" || text == "probabilistic") return PolicyKind::Probabilistic;
  if (text == "Mdp" || text == "mdp" || text == "MDP") return PolicyKind::Mdp;
  return std::nullopt;
}

bool PolicySpec::needs_model() const {
  return kind == PolicyKind::MaxImprove || kind == PolicyKind::Probabilistic ||
         kind == PolicyKind::Mdp;
}

void PolicySpec::validate() const {
  if (kind == PolicyKind::HardStop && stop_after < 1) {
    throw Error(ErrorKind::Config, "HardStop needs stop_after >= 1");
  }
  if (kind == PolicyKind::Mdp && model_class == ModelClass::ZerothOrder) {
    throw Error(ErrorKind::Config,
                "an MDP over a zeroth-order model is trivial: the next change does not depend on "
                "history, use RawEffect instead");
  }
  if (kind == PolicyKind::Mdp && !(osf >= 0.0)) {
    throw Error(ErrorKind::Config, "osf must be non-negative");
  }
}

std::string PolicySpec::label() const {
  switch (kind) {
    case PolicyKind::HardStop: return fmt::format("HardStop({})", stop_after);
    case PolicyKind::RawEffect: return "RawEffect";
    case PolicyKind::MaxImprove: return fmt::format("MaxImprove[{}]", to_string(model_class));
    case PolicyKind::Probabilistic: return fmt::format("Probabilistic[{}]", to_string(model_class));
    case PolicyKind::Mdp:
      return fmt::format("Mdp-{}[{}] osf={}", to_string(mode), to_string(model_class), osf);
  }
  return "unknown";
}

double improvement_probability(const Belief& b, const TransitionModel& model) {
  const BinVector q = next_step_distribution(b, Action::Treat, model);
  return q[index_of(DeltaBin::LowImprovement)] + q[index_of(DeltaBin::HighImprovement)];
}

DeltaBin modal_next_bin(const Belief& b, const TransitionModel& model) {
  const BinVector q = next_step_distribution(b, Action::Treat, model);
  std::size_t best = 0;
  for (std::size_t n = 1; n < kNumBins; ++n) {
    if (q[n] >= q[best]) best = n;
  }
  return bin_at(best);
}

Action decide(const PolicySpec& policy, const DecisionContext& ctx, const TransitionModel* model,
              const ScaleConfig& cfg, const PlannerTuning& tuning) {
  if (ctx.session_index >= cfg.horizon) {
    throw Error(ErrorKind::HorizonReached, "no decision left at the horizon");
  }
  if (policy.needs_model() && model == nullptr) {
    throw Error(ErrorKind::Config, fmt::format("{} needs a fitted transition model", policy.label()));
  }
  if (policy.needs_model() && model->model_class() != policy.model_class) {
    throw Error(ErrorKind::Config,
                fmt::format("{} was given a {} model", policy.label(), to_string(model->model_class())));
  }
  switch (policy.kind) {
    case PolicyKind::HardStop:
      return ctx.session_index < policy.stop_after ? Action::Treat : Action::Stop;
    case PolicyKind::RawEffect:
      return Action::Treat;
    case PolicyKind::MaxImprove:
      return is_improvement(modal_next_bin(ctx.belief, *model)) ? Action::Treat : Action::Stop;
    case PolicyKind::Probabilistic: {
      if (ctx.coins == nullptr) throw Error(ErrorKind::Config, "Probabilistic needs a random stream");
      const double p = improvement_probability(ctx.belief, *model);
      return ctx.coins->bernoulli(p) ? Action::Treat : Action::Stop;
    }
    case PolicyKind::Mdp: {
      policy.validate();
      PlannerSettings settings;
      settings.mode = policy.mode;
      settings.osf = policy.osf;
      settings.osf_scale = tuning.osf_scale;
      settings.delta_max_floor = tuning.delta_max_floor;
      settings.node_budget = tuning.node_budget;
      return plan(ctx.belief, ctx.session_index, ctx.accumulated_cost, *model, cfg, settings)
          .root_action;
    }
  }
  return Action::Stop;
}

}  // namespace treatsim
