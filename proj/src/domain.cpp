#include "treatsim/domain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "treatsim/error.hpp"

namespace treatsim {

namespace {

constexpr std::array<std::string_view, kNumBins> kBinNames{
    "HighDeterioration", "LowDeterioration", "Flatline", "LowImprovement", "HighImprovement"};

}  // namespace

std::string_view to_string(DeltaBin bin) { return kBinNames[index_of(bin)]; }

std::optional<DeltaBin> parse_delta_bin(std::string_view text) {
  for (std::size_t i = 0; i < kNumBins; ++i) {
    if (kBinNames[i] == text) return bin_at(i);
  }
  return std::nullopt;
}

std::string_view to_string(Action action) {
  return action == Action::Treat ? "Treat" : "Stop";
}

OutcomeScore Observation::score() const {
  if (!score_) throw Error(ErrorKind::InvalidInput, "observation is missing");
  return *score_;
}

void ScaleConfig::validate() const {
  if (!(score_min.value < score_max.value)) {
    throw Error(ErrorKind::Config,
                fmt::format("score_min ({}) must be below score_max ({})", score_min.value,
                            score_max.value));
  }
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
    if (!(bin_edges[i] < bin_edges[i + 1])) {
      throw Error(ErrorKind::Config, "bin edges must be strictly increasing");
    }
  }
  if (!(cps > 0.0)) throw Error(ErrorKind::Config, "cps must be positive");
  if (horizon < 1) throw Error(ErrorKind::Config, "horizon must be at least 1");
}

OutcomeScore ScaleConfig::clamp(double value) const {
  return OutcomeScore{std::clamp(value, score_min.value, score_max.value)};
}

bool ScaleConfig::contains(OutcomeScore score) const {
  return score.value >= score_min.value && score.value <= score_max.value;
}

DeltaBin bin_delta(double delta, const BinEdges& edges) {
  if (!std::isfinite(delta)) {
    throw Error(ErrorKind::InvalidInput, fmt::format("cannot bin non-finite delta {}", delta));
  }
  if (delta < edges[0]) return DeltaBin::HighDeterioration;
  if (delta < edges[1]) return DeltaBin::LowDeterioration;
  if (delta <= edges[2]) return DeltaBin::Flatline;
  if (delta <= edges[3]) return DeltaBin::LowImprovement;
  return DeltaBin::HighImprovement;
}

double delta_from_scores(OutcomeScore current, OutcomeScore reference) {
  return current.value - reference.value;
}

double delta_from_scores(OutcomeScore current, OutcomeScore reference, const ScaleConfig& cfg) {
  if (!cfg.contains(current) || !cfg.contains(reference)) {
    throw Error(ErrorKind::InvalidInput,
                fmt::format("scores {} and {} must lie in [{}, {}]", current.value,
                            reference.value, cfg.score_min.value, cfg.score_max.value));
  }
  return delta_from_scores(current, reference);
}

}  // namespace treatsim
