#include "treatsim/belief.hpp"

#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "treatsim/error.hpp"

namespace treatsim {

Belief Belief::at_intake(OutcomeScore baseline) {
  return Belief{point_mass(DeltaBin::Flatline), baseline, baseline, baseline};
}

ObservationModel ObservationModel::identity() {
  std::array<BinVector, kNumBins> rows{};
  for (DeltaBin bin : kAllBins) rows[index_of(bin)] = point_mass(bin);
  return ObservationModel(rows);
}

bool ObservationModel::is_identity() const {
  for (DeltaBin bin : kAllBins) {
    if (rows_[index_of(bin)] != point_mass(bin)) return false;
  }
  return true;
}

ObservationModel::ObservationModel(std::array<BinVector, kNumBins> rows) : rows_(rows) {
  for (const auto& row : rows_) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw Error(ErrorKind::InvalidInput, "observation model has a negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidInput,
                  fmt::format("observation model row sums to {} instead of 1", sum));
    }
  }
}

BinVector next_step_distribution(const Belief& b, Action a, const TransitionModel& model) {
  BinVector q{};
  for (DeltaBin s : kAllBins) {
    const double w = b.probs[index_of(s)];
    if (w == 0.0) continue;
    const BinVector row = next_bin_distribution(model, s, a);
    for (std::size_t n = 0; n < kNumBins; ++n) q[n] += w * row[n];
  }
  return q;
}

DeltaBin conditioning_after(const Belief& b, DeltaBin step_bin, const TransitionModel& model,
                            const ScaleConfig& cfg) {
  if (model.model_class() != ModelClass::GlobalAverage) return step_bin;
  const OutcomeScore advanced = cfg.clamp(b.expected_score.value + model.effect_mean(step_bin));
  return bin_delta(delta_from_scores(advanced, b.baseline_score), cfg.bin_edges);
}

Belief predict(const Belief& b, Action a, const TransitionModel& model, const ScaleConfig& cfg) {
  const BinVector q = next_step_distribution(b, a, model);

  Belief next = b;
  next.previous_score = b.expected_score;
  double expected_effect = 0.0;
  for (std::size_t n = 0; n < kNumBins; ++n) expected_effect += q[n] * model.effect_mean(bin_at(n));
  next.expected_score = cfg.clamp(b.expected_score.value + expected_effect);

  if (a == Action::Stop) {
    next.probs = q;
    return next;
  }
  next.probs = BinVector{};
  for (std::size_t n = 0; n < kNumBins; ++n) {
    if (q[n] == 0.0) continue;
    next.probs[index_of(conditioning_after(b, bin_at(n), model, cfg))] += q[n];
  }
  return next;
}

DeltaBin observed_bin(const Belief& b, OutcomeScore score, ModelClass convention,
                      const ScaleConfig& cfg) {
  const OutcomeScore reference =
      convention == ModelClass::GlobalAverage ? b.baseline_score : b.previous_score;
  return bin_delta(delta_from_scores(score, reference), cfg.bin_edges);
}

Belief update(const Belief& b, const Observation& o, const ObservationModel& obs_model,
              ModelClass convention, const ScaleConfig& cfg) {
  if (o.is_missing()) return b;

  const OutcomeScore reading = o.score();
  const DeltaBin seen = observed_bin(b, reading, convention, cfg);

  Belief next = b;
  next.expected_score = cfg.clamp(reading.value);
  double z = 0.0;
  for (DeltaBin s : kAllBins) {
    const double p = obs_model.likelihood(seen, s) * b.probs[index_of(s)];
    next.probs[index_of(s)] = p;
    z += p;
  }
  if (z <= 0.0) {
    // An exact reading that the coarse prediction did not cover is routine;
    // a noisy model contradicting the belief is worth flagging.
    if (obs_model.is_identity()) {
      spdlog::debug("observation {} outside the predicted support; trusting the reading",
                    to_string(seen));
    } else {
      spdlog::warn("observation {} has zero probability under the belief; trusting the reading",
                   to_string(seen));
    }
    next.probs = point_mass(seen);
    return next;
  }
  for (double& p : next.probs) p /= z;
  return next;
}

std::vector<Belief> forecast(const Belief& b, std::span<const Action> actions,
                             const TransitionModel& model, const ScaleConfig& cfg) {
  if (actions.empty()) throw Error(ErrorKind::InvalidInput, "forecast needs at least one action");
  std::vector<Belief> out;
  out.reserve(actions.size());
  Belief current = b;
  for (Action a : actions) {
    current = predict(current, a, model, cfg);
    out.push_back(current);
  }
  return out;
}

}  // namespace treatsim
