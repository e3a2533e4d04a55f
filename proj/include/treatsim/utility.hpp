#pragma once

#include "treatsim/belief.hpp"
#include "treatsim/domain.hpp"

namespace treatsim {

struct EpisodeOutcome {
  double total_cost = 0.0;
  double final_delta = 0.0;  // final score minus baseline
  int sessions_used = 0;
  bool max_dosage = false;   // sessions_used == horizon
};

/// Cost per unit change. Deltas below one are charged one extra `cps` per
/// unit of shortfall, which keeps the function continuous at delta = 1.
double cpuc(double total_cost, double final_delta, double cps);

/// Adds `osf` times the normalised outcome shortfall (delta_max - delta) / delta_max.
double osf_adjust(double cpuc_value, double delta, double delta_max, double osf);

/// Largest achievable improvement over baseline, never below `floor`.
double delta_max_for(const Belief& b, const ScaleConfig& cfg, double floor = 1.0);

}  // namespace treatsim
