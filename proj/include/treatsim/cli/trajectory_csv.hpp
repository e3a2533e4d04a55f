#pragma once

#include <filesystem>
#include <iosfwd>

#include "treatsim/transition_model.hpp"

namespace treatsim::cli {

/// Header of the trajectory format. `session` is 0-based (0 = intake), an
/// empty `score` is a missing reading, `cost` is in currency units.
inline constexpr std::string_view kTrajectoryHeader = "patient_id,session,score,cost";

/// Throws Error(Parse) with the offending line number on malformed input.
TrajectoryDataset read_trajectories(std::istream& in);
TrajectoryDataset read_trajectories(const std::filesystem::path& path);

/// Scores and costs are written in shortest round-trip form.
void write_trajectories(std::ostream& out, const TrajectoryDataset& data);
void write_trajectories(const std::filesystem::path& path, const TrajectoryDataset& data);

}  // namespace treatsim::cli
