#include "treatsim/world.hpp"

#include <cmath>

#include <fmt/format.h>

#include "treatsim/error.hpp"

namespace treatsim {

namespace {

constexpr int kRejectionTries = 200;

// Finite sampling interval of a bin; outer bins are cut three units past the edge.
std::pair<double, double> finite_interval(DeltaBin bin, const BinEdges& e) {
  switch (bin) {
    case DeltaBin::HighDeterioration: return {e[0] - 3.0, e[0]};
    case DeltaBin::LowDeterioration: return {e[0], e[1]};
    case DeltaBin::Flatline: return {e[1], e[2]};
    case DeltaBin::LowImprovement: return {e[2], e[3]};
    case DeltaBin::HighImprovement: return {e[3], e[3] + 3.0};
  }
  return {0.0, 0.0};
}

DeltaBin sample_bin(const BinVector& row, RandomStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t n = 0; n < kNumBins; ++n) {
    cumulative += row[n];
    if (u < cumulative && row[n] > 0.0) return bin_at(n);
  }
  // Rounding left u above the cumulative sum: take the last bin with mass.
  for (std::size_t n = kNumBins; n-- > 0;) {
    if (row[n] > 0.0) return bin_at(n);
  }
  return DeltaBin::Flatline;
}

}  // namespace

void SimulationConfig::validate() const {
  scale.validate();
  if (population_size < 1) throw Error(ErrorKind::Config, "population_size must be at least 1");
  if (!(p_missing >= 0.0 && p_missing <= 1.0)) {
    throw Error(ErrorKind::Config, "p_missing must lie in [0, 1]");
  }
  if (!(baseline_std >= 0.0)) throw Error(ErrorKind::Config, "baseline_std must be >= 0");
  if (!std::isfinite(baseline_mean)) throw Error(ErrorKind::Config, "baseline_mean must be finite");
}

DeltaBin PatientAgent::world_conditioning(const ScaleConfig& cfg) const {
  switch (world_model->model_class()) {
    case ModelClass::ZerothOrder: return DeltaBin::Flatline;
    case ModelClass::FirstOrderLocal:
      return bin_delta(delta_from_scores(true_score, previous_true_score), cfg.bin_edges);
    case ModelClass::GlobalAverage:
      return bin_delta(delta_from_scores(true_score, baseline_score), cfg.bin_edges);
  }
  return DeltaBin::Flatline;
}

TransitionModel reference_model(ModelClass model_class) {
  // Effects shared by all classes: one-step change in score units.
  const EffectTable effects{{{-6.5, 1.8}, {-2.5, 0.8}, {0.0, 0.55}, {2.5, 0.8}, {6.5, 1.8}}};
  switch (model_class) {
    case ModelClass::ZerothOrder:
      return TransitionModel(model_class, {{0.07, 0.12, 0.33, 0.28, 0.20}}, effects);
    case ModelClass::FirstOrderLocal:
      return TransitionModel(model_class,
                             {{0.10, 0.14, 0.30, 0.26, 0.20},
                              {0.08, 0.13, 0.33, 0.27, 0.19},
                              {0.06, 0.11, 0.33, 0.29, 0.21},
                              {0.07, 0.12, 0.34, 0.28, 0.19},
                              {0.09, 0.14, 0.37, 0.24, 0.16}},
                             effects);
    case ModelClass::GlobalAverage:
      // Slow start from intake, momentum once a patient has begun to improve,
      // a plateau after large gains, and rebound from deterioration.
      return TransitionModel(model_class,
                             {{0.01, 0.03, 0.16, 0.30, 0.50},
                              {0.01, 0.03, 0.20, 0.36, 0.40},
                              {0.02, 0.04, 0.40, 0.42, 0.12},
                              {0.01, 0.02, 0.12, 0.25, 0.60},
                              {0.04, 0.08, 0.55, 0.23, 0.10}},
                             effects);
  }
  throw Error(ErrorKind::InvalidInput, "unknown model class");
}

std::vector<PatientAgent> generate_population(const SimulationConfig& cfg,
                                              std::shared_ptr<const TransitionModel> world_model) {
  cfg.validate();
  if (!world_model) throw Error(ErrorKind::Config, "population needs a world model");
  std::vector<PatientAgent> out;
  out.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) {
    PatientAgent agent;
    agent.patient_id = i + 1;
    RandomStream rng(cfg.seed, Stream::Population, static_cast<std::uint64_t>(agent.patient_id));
    agent.baseline_score = cfg.scale.clamp(rng.normal(cfg.baseline_mean, cfg.baseline_std));
    agent.true_score = agent.baseline_score;
    agent.previous_true_score = agent.baseline_score;
    agent.world_model = world_model;
    agent.seed = cfg.seed;
    out.push_back(std::move(agent));
  }
  return out;
}

double sample_bin_effect(DeltaBin bin, const EffectParams& effect, const BinEdges& edges,
                         RandomStream& rng) {
  const auto [lo, hi] = finite_interval(bin, edges);
  if (effect.stddev > 0.0) {
    for (int i = 0; i < kRejectionTries; ++i) {
      const double x = rng.normal(effect.mean, effect.stddev);
      if (bin_delta(x, edges) == bin) return x;
    }
  } else if (bin_delta(effect.mean, edges) == bin) {
    return effect.mean;
  }
  // The Gaussian puts almost no mass in the bin: fall back to uniform.
  for (;;) {
    const double x = rng.uniform(lo, hi);
    if (bin_delta(x, edges) == bin) return x;
  }
}

StepResult step_world(PatientAgent& agent, Action a, const SimulationConfig& cfg) {
  StepResult result;
  if (a == Action::Treat) {
    RandomStream dynamics(agent.seed, Stream::WorldDynamics,
                          static_cast<std::uint64_t>(agent.patient_id),
                          static_cast<std::uint64_t>(agent.sessions_done));
    const DeltaBin conditioning = agent.world_conditioning(cfg.scale);
    const DeltaBin next = sample_bin(agent.world_model->row(conditioning), dynamics);
    const double change = sample_bin_effect(next, agent.world_model->effects()[index_of(next)],
                                            cfg.scale.bin_edges, dynamics);
    agent.previous_true_score = agent.true_score;
    agent.true_score = cfg.scale.clamp(agent.true_score.value + change);
    ++agent.sessions_done;
    result.cost = cfg.scale.cps;
  }
  result.true_score = agent.true_score;

  RandomStream mask(agent.seed, Stream::Missingness, static_cast<std::uint64_t>(agent.patient_id),
                    static_cast<std::uint64_t>(agent.replication),
                    static_cast<std::uint64_t>(agent.sessions_done));
  result.observation =
      mask.bernoulli(cfg.p_missing) ? Observation::missing() : Observation::of(agent.true_score);
  return result;
}

EpisodeState run_episode(PatientAgent agent, const PolicySpec& policy,
                         const TransitionModel* planner_model, const SimulationConfig& cfg,
                         const EpisodeOptions& options) {
  policy.validate();
  EpisodeState episode{std::move(agent), {}, false, {}};
  PatientAgent& patient = episode.patient;
  const ScaleConfig& scale = cfg.scale;

  RandomStream coins(patient.seed, Stream::PolicyCoins, static_cast<std::uint64_t>(patient.patient_id),
                     static_cast<std::uint64_t>(patient.replication));
  Belief belief = Belief::at_intake(patient.baseline_score);
  Observation last = Observation::of(patient.baseline_score);
  double cost = 0.0;

  for (int k = 0; k < scale.horizon; ++k) {
    if (k > 0 && planner_model != nullptr) {
      belief = update(belief, last, options.obs_model, planner_model->model_class(), scale);
    }
    const DecisionContext ctx{belief, k, cost, &coins};
    const Action action = decide(policy, ctx, planner_model, scale, options.tuning);
    if (action == Action::Stop) {
      step_world(patient, Action::Stop, cfg);
      break;
    }
    const StepResult step = step_world(patient, Action::Treat, cfg);
    episode.sessions.push_back(SessionRecord{Action::Treat, step.true_score, step.observation, step.cost});
    cost += step.cost;
    last = step.observation;
    if (planner_model != nullptr) belief = predict(belief, Action::Treat, *planner_model, scale);
  }

  episode.terminated = true;
  episode.outcome.total_cost = cost;
  episode.outcome.final_delta = delta_from_scores(patient.true_score, patient.baseline_score);
  episode.outcome.sessions_used = static_cast<int>(episode.sessions.size());
  episode.outcome.max_dosage = episode.outcome.sessions_used == scale.horizon;
  return episode;
}

EpisodeState replay_episode(const Trajectory& record, int patient_id, const PolicySpec& policy,
                            const TransitionModel* planner_model, const SimulationConfig& cfg,
                            const EpisodeOptions& options) {
  policy.validate();
  if (record.sessions.empty() || record.sessions.front().session != 0 ||
      record.sessions.front().observation.is_missing()) {
    throw Error(ErrorKind::InvalidInput,
                fmt::format("trajectory '{}' has no baseline reading", record.patient_id));
  }
  const ScaleConfig& scale = cfg.scale;
  EpisodeState episode;
  PatientAgent& patient = episode.patient;
  patient.patient_id = patient_id;
  patient.seed = cfg.seed;
  patient.baseline_score = record.sessions.front().observation.score();
  patient.true_score = patient.baseline_score;
  patient.previous_true_score = patient.baseline_score;

  const int last_session = record.sessions.back().session;
  auto reading_at = [&](int session) {
    for (const SessionEntry& e : record.sessions) {
      if (e.session == session) return e.observation;
    }
    return Observation::missing();
  };

  RandomStream coins(cfg.seed, Stream::PolicyCoins, static_cast<std::uint64_t>(patient_id), 0);
  Belief belief = Belief::at_intake(patient.baseline_score);
  Observation last = Observation::of(patient.baseline_score);
  double cost = 0.0;

  for (int k = 0; k < scale.horizon && k < last_session; ++k) {
    if (k > 0 && planner_model != nullptr) {
      belief = update(belief, last, options.obs_model, planner_model->model_class(), scale);
    }
    const DecisionContext ctx{belief, k, cost, &coins};
    if (decide(policy, ctx, planner_model, scale, options.tuning) == Action::Stop) break;

    last = reading_at(k + 1);
    if (!last.is_missing()) {
      patient.previous_true_score = patient.true_score;
      patient.true_score = last.score();
    }
    ++patient.sessions_done;
    episode.sessions.push_back(SessionRecord{Action::Treat, patient.true_score, last, scale.cps});
    cost += scale.cps;
    if (planner_model != nullptr) belief = predict(belief, Action::Treat, *planner_model, scale);
  }

  episode.terminated = true;
  episode.outcome.total_cost = cost;
  episode.outcome.final_delta = delta_from_scores(patient.true_score, patient.baseline_score);
  episode.outcome.sessions_used = static_cast<int>(episode.sessions.size());
  episode.outcome.max_dosage = episode.outcome.sessions_used == scale.horizon;
  return episode;
}

TrajectoryDataset to_dataset(const std::vector<EpisodeState>& episodes) {
  TrajectoryDataset data;
  data.trajectories.reserve(episodes.size());
  for (const EpisodeState& ep : episodes) {
    Trajectory traj;
    traj.patient_id = std::to_string(ep.patient.patient_id);
    traj.sessions.push_back({0, Observation::of(ep.patient.baseline_score), 0.0});
    int session = 1;
    for (const SessionRecord& rec : ep.sessions) {
      traj.sessions.push_back({session++, rec.observation, rec.cost});
    }
    data.trajectories.push_back(std::move(traj));
  }
  return data;
}

}  // namespace treatsim
