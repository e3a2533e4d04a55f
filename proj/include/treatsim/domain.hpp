#pragma once

// Outcome scale, delta binning and the value types shared by every module.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace treatsim {

/// Outcome-change category. Ordered from worst to best.
enum class DeltaBin : std::uint8_t {
  HighDeterioration,
  LowDeterioration,
  Flatline,
  LowImprovement,
  HighImprovement,
};

inline constexpr std::size_t kNumBins = 5;

inline constexpr std::array<DeltaBin, kNumBins> kAllBins{
    DeltaBin::HighDeterioration, DeltaBin::LowDeterioration, DeltaBin::Flatline,
    DeltaBin::LowImprovement, DeltaBin::HighImprovement};

constexpr std::size_t index_of(DeltaBin bin) { return static_cast<std::size_t>(bin); }
constexpr DeltaBin bin_at(std::size_t i) { return kAllBins.at(i); }

constexpr bool is_improvement(DeltaBin bin) {
  return bin == DeltaBin::LowImprovement || bin == DeltaBin::HighImprovement;
}

std::string_view to_string(DeltaBin bin);
std::optional<DeltaBin> parse_delta_bin(std::string_view text);

/// A per-bin vector: probabilities, counts-as-reals, or per-bin values.
using BinVector = std::array<double, kNumBins>;

constexpr BinVector point_mass(DeltaBin bin) {
  BinVector v{};
  v[index_of(bin)] = 1.0;
  return v;
}

struct OutcomeScore {
  double value = 0.0;

  friend constexpr auto operator<=>(const OutcomeScore&, const OutcomeScore&) = default;
};

enum class Action : std::uint8_t { Treat, Stop };

std::string_view to_string(Action action);

/// A session reading: either missing or an outcome score.
class Observation {
 public:
  static Observation missing() { return Observation{}; }
  static Observation of(OutcomeScore score) { return Observation{score}; }

  bool is_missing() const { return !score_.has_value(); }
  /// Throws Error(InvalidInput) when missing.
  OutcomeScore score() const;

  friend bool operator==(const Observation&, const Observation&) = default;

 private:
  Observation() = default;
  explicit Observation(OutcomeScore score) : score_(score) {}

  std::optional<OutcomeScore> score_;
};

/// Thresholds separating the five bins, lowest first.
using BinEdges = std::array<double, 4>;

inline constexpr BinEdges kDefaultBinEdges{-4.0, -1.0, 1.0, 4.0};

struct ScaleConfig {
  OutcomeScore score_min{0.0};
  OutcomeScore score_max{40.0};
  BinEdges bin_edges = kDefaultBinEdges;
  double cps = 100.0;  // currency per treatment session
  int horizon = 8;     // maximum number of treatment sessions

  /// Throws Error(Config) if any invariant is violated.
  void validate() const;

  OutcomeScore clamp(double value) const;
  bool contains(OutcomeScore score) const;
};

/// Bins a continuous outcome change. Boundaries:
///   d < e0 | e0 <= d < e1 | e1 <= d <= e2 | e2 < d <= e3 | d > e3
DeltaBin bin_delta(double delta, const BinEdges& edges = kDefaultBinEdges);

double delta_from_scores(OutcomeScore current, OutcomeScore reference);

/// Range-checked variant; throws Error(InvalidInput) for out-of-scale scores.
double delta_from_scores(OutcomeScore current, OutcomeScore reference,
                         const ScaleConfig& cfg);

}  // namespace treatsim
