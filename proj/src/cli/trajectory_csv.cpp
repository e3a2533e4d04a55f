#include "treatsim/cli/trajectory_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "treatsim/error.hpp"

namespace treatsim::cli {

namespace {

// Splits one record; double-quoted fields may hold commas and doubled quotes.
std::optional<std::vector<std::string>> split_record(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') {
        out.back() += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) return std::nullopt;
  return out;
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

TrajectoryDataset read_trajectories(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto fail = [&](std::string_view why) {
    return Error(ErrorKind::Parse, fmt::format("line {}: {}", line_no, why));
  };

  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "line 1: missing header");
  ++line_no;
  if (trim(line) != kTrajectoryHeader) {
    throw fail(fmt::format("expected header '{}'", kTrajectoryHeader));
  }

  TrajectoryDataset data;
  std::map<std::string, std::size_t, std::less<>> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto record = split_record(line);
    if (!record) throw fail("unterminated quoted field");
    const auto& fields = *record;
    if (fields.size() != 4) throw fail(fmt::format("expected 4 fields, got {}", fields.size()));

    const std::string_view id = trim(fields[0]);
    if (id.empty()) throw fail("empty patient_id");
    SessionEntry entry;
    if (!parse_number(trim(fields[1]), entry.session) || entry.session < 0) {
      throw fail("session must be a non-negative integer");
    }
    const std::string_view score_text = trim(fields[2]);
    if (!score_text.empty()) {
      double score = 0.0;
      if (!parse_number(score_text, score) || !std::isfinite(score)) throw fail("score is not a number");
      entry.observation = Observation::of(OutcomeScore{score});
    }
    const std::string_view cost_text = trim(fields[3]);
    if (!cost_text.empty() && (!parse_number(cost_text, entry.cost) || entry.cost < 0.0)) {
      throw fail("cost must be a non-negative number");
    }

    auto it = index.find(id);
    if (it == index.end()) {
      it = index.emplace(std::string(id), data.trajectories.size()).first;
      data.trajectories.push_back(Trajectory{std::string(id), {}});
    }
    auto& sessions = data.trajectories[it->second].sessions;
    if (!sessions.empty() && entry.session <= sessions.back().session) {
      throw fail(fmt::format("patient {}: session {} does not follow session {}", id, entry.session,
                             sessions.back().session));
    }
    sessions.push_back(entry);
  }
  return data;
}

TrajectoryDataset read_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
  try {
    return read_trajectories(in);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_trajectories(std::ostream& out, const TrajectoryDataset& data) {
  out << kTrajectoryHeader << '\n';
  for (const Trajectory& traj : data.trajectories) {
    const std::string id = quote_if_needed(traj.patient_id);
    for (const SessionEntry& s : traj.sessions) {
      if (s.observation.is_missing()) {
        fmt::print(out, "{},{},,{}\n", id, s.session, s.cost);
      } else {
        fmt::print(out, "{},{},{},{}\n", id, s.session, s.observation.score().value, s.cost);
      }
    }
  }
}

void write_trajectories(const std::filesystem::path& path, const TrajectoryDataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
  write_trajectories(out, data);
}

}  // namespace treatsim::cli
