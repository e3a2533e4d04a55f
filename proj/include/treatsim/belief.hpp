#pragma once

#include <array>
#include <span>
#include <vector>

#include "treatsim/domain.hpp"
#include "treatsim/transition_model.hpp"

namespace treatsim {

/// The physician agent's knowledge of one patient. `probs` is expressed in
/// the conditioning frame of the active model class (one-step change for
/// FirstOrderLocal, change since baseline for GlobalAverage).
struct Belief {
  BinVector probs = point_mass(DeltaBin::Flatline);
  OutcomeScore expected_score{};   // estimate of the current score
  OutcomeScore previous_score{};   // estimate of the score one session earlier
  OutcomeScore baseline_score{};

  /// Belief right after the intake reading: no change observed yet.
  static Belief at_intake(OutcomeScore baseline);
};

/// P(observed bin | true bin), rows indexed by the true bin.
class ObservationModel {
 public:
  static ObservationModel identity();
  /// Throws Error(InvalidInput) unless every row is a probability vector.
  explicit ObservationModel(std::array<BinVector, kNumBins> rows);

  double likelihood(DeltaBin observed, DeltaBin true_bin) const {
    return rows_[index_of(true_bin)][index_of(observed)];
  }
  const std::array<BinVector, kNumBins>& rows() const { return rows_; }
  bool is_identity() const;

 private:
  std::array<BinVector, kNumBins> rows_;
};

/// Distribution of the next one-step change bin: sum_s TR(. | s, a) b(s).
BinVector next_step_distribution(const Belief& b, Action a, const TransitionModel& model);

/// Conditioning bin reached after a one-step change falling in `step_bin`,
/// with the score estimate advanced by that bin's effect mean.
DeltaBin conditioning_after(const Belief& b, DeltaBin step_bin, const TransitionModel& model,
                            const ScaleConfig& cfg);

/// Predict step. The expected score advances by the expected effect mean and
/// is clamped to the scale.
Belief predict(const Belief& b, Action a, const TransitionModel& model, const ScaleConfig& cfg);

/// Bayesian update. A missing observation leaves the belief unchanged; a
/// reading replaces the expected score.
Belief update(const Belief& b, const Observation& o, const ObservationModel& obs_model,
              ModelClass convention, const ScaleConfig& cfg);

/// Bin of the change carried by reading `score` under `convention`.
DeltaBin observed_bin(const Belief& b, OutcomeScore score, ModelClass convention,
                      const ScaleConfig& cfg);

/// Repeated predict without updates; element k is the belief after k+1 actions.
std::vector<Belief> forecast(const Belief& b, std::span<const Action> actions,
                             const TransitionModel& model, const ScaleConfig& cfg);

}  // namespace treatsim
