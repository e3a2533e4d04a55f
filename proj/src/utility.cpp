#include "treatsim/utility.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "treatsim/error.hpp"

namespace treatsim {

double cpuc(double total_cost, double final_delta, double cps) {
  if (final_delta >= 1.0) return total_cost / final_delta;
  return total_cost + (1.0 - final_delta) * cps;
}

double osf_adjust(double cpuc_value, double delta, double delta_max, double osf) {
  if (!(delta_max > 0.0)) {
    throw Error(ErrorKind::InvalidInput, fmt::format("delta_max must be positive, got {}", delta_max));
  }
  if (!(osf >= 0.0)) throw Error(ErrorKind::InvalidInput, "osf must be non-negative");
  if (delta > delta_max + 1e-9) {
    throw Error(ErrorKind::InvalidInput,
                fmt::format("delta {} exceeds delta_max {}", delta, delta_max));
  }
  if (osf == 0.0) return cpuc_value;
  return cpuc_value + osf * ((delta_max - delta) / delta_max);
}

double delta_max_for(const Belief& b, const ScaleConfig& cfg, double floor) {
  return std::max(cfg.score_max.value - b.baseline_score.value, floor);
}

}  // namespace treatsim
