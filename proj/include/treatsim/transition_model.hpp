#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treatsim/domain.hpp"

namespace treatsim {

/// How the history of a trajectory is summarised before predicting the next
/// one-step outcome change.
enum class ModelClass : std::uint8_t {
  ZerothOrder,      // no conditioning
  FirstOrderLocal,  // bin of the previous one-step change
  GlobalAverage,    // bin of the change since baseline
};

std::string_view to_string(ModelClass model_class);
/// Accepts the enum names and the short forms "zeroth", "local", "global".
std::optional<ModelClass> parse_model_class(std::string_view text);

/// Gaussian parameters of the continuous one-step change within a bin.
struct EffectParams {
  double mean = 0.0;
  double stddev = 1.0;
};

using EffectTable = std::array<EffectParams, kNumBins>;
using CountRow = std::array<std::size_t, kNumBins>;

struct FitDiagnostics {
  std::size_t trajectories = 0;
  std::size_t unusable_trajectories = 0;  // no baseline reading
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;  // a missing reading on either side
  std::vector<DeltaBin> smoothed_rows;     // zero-count rows replaced by uniform
  std::vector<DeltaBin> effect_fallbacks;  // bins with fewer than two samples
  std::array<std::size_t, kNumBins> effect_samples{};
};

/// Conditional probability table P(next one-step bin | conditioning bin) for
/// the Treat action, plus per-bin treatment-effect parameters. Immutable.
class TransitionModel {
 public:
  /// `rows` holds one row for ZerothOrder and five rows otherwise. Throws
  /// Error(InvalidInput) if a row is not a probability vector or a standard
  /// deviation is negative.
  TransitionModel(ModelClass model_class, std::vector<BinVector> rows, EffectTable effects,
                  std::vector<CountRow> counts = {}, FitDiagnostics diagnostics = {});

  ModelClass model_class() const { return model_class_; }

  /// Row used for the given conditioning bin; ZerothOrder ignores the bin.
  const BinVector& row(DeltaBin conditioning) const;
  const std::vector<BinVector>& rows() const { return rows_; }

  const EffectTable& effects() const { return effects_; }
  double effect_mean(DeltaBin bin) const { return effects_[index_of(bin)].mean; }

  const std::vector<CountRow>& counts() const { return counts_; }
  const FitDiagnostics& diagnostics() const { return diagnostics_; }

  /// Checks the effect means against the bin intervals of `cfg`. Throws
  /// Error(InvalidInput) on the first inconsistency.
  void validate_effects(const ScaleConfig& cfg) const;

 private:
  ModelClass model_class_;
  std::vector<BinVector> rows_;
  EffectTable effects_;
  std::vector<CountRow> counts_;
  FitDiagnostics diagnostics_;
};

struct SessionEntry {
  int session = 0;  // 0 is the baseline/intake reading
  Observation observation = Observation::missing();
  double cost = 0.0;
};

struct Trajectory {
  std::string patient_id;
  std::vector<SessionEntry> sessions;  // strictly increasing session index
};

struct TrajectoryDataset {
  std::vector<Trajectory> trajectories;
};

/// Maximum-likelihood fit of the given model class. Conditioning conventions:
/// FirstOrderLocal uses the previous one-step change (0 at the baseline step),
/// GlobalAverage uses the change since the baseline reading. Pairs touching a
/// missing or unrecorded reading are skipped.
TransitionModel fit(const TrajectoryDataset& data, ModelClass model_class,
                    const ScaleConfig& cfg);

/// Fallback effect used for a bin with fewer than two samples.
EffectParams default_effect(DeltaBin bin, const BinEdges& edges = kDefaultBinEdges);

/// Next-step bin distribution. Stop is a point mass on Flatline.
BinVector next_bin_distribution(const TransitionModel& model, DeltaBin conditioning,
                                Action action);

/// Plain-text model format: a header line with the class, one line per
/// conditioning row (label then five probabilities), then one line per bin
/// with the effect mean and standard deviation.
void write_model(std::ostream& out, const TransitionModel& model);
TransitionModel read_model(std::istream& in);

void write_diagnostics(std::ostream& out, const TransitionModel& model);

}  // namespace treatsim
