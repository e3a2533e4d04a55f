#include "treatsim/transition_model.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "treatsim/error.hpp"

namespace treatsim {

namespace {

constexpr double kRowTolerance = 1e-9;

void check_probability_row(const BinVector& row, std::string_view what) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::InvalidInput, fmt::format("{} has a negative or non-finite entry", what));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowTolerance) {
    throw Error(ErrorKind::InvalidInput, fmt::format("{} sums to {} instead of 1", what, sum));
  }
}

std::size_t expected_rows(ModelClass model_class) {
  return model_class == ModelClass::ZerothOrder ? 1 : kNumBins;
}

// Lowest and highest value a change in `bin` can take (outer bins unbounded).
std::pair<double, double> bin_interval(DeltaBin bin, const BinEdges& e) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (bin) {
    case DeltaBin::HighDeterioration: return {-inf, e[0]};
    case DeltaBin::LowDeterioration: return {e[0], e[1]};
    case DeltaBin::Flatline: return {e[1], e[2]};
    case DeltaBin::LowImprovement: return {e[2], e[3]};
    case DeltaBin::HighImprovement: return {e[3], inf};
  }
  return {-inf, inf};
}

}  // namespace

std::string_view to_string(ModelClass model_class) {
  switch (model_class) {
    case ModelClass::ZerothOrder: return "ZerothOrder";
    case ModelClass::FirstOrderLocal: return "FirstOrderLocal";
    case ModelClass::GlobalAverage: return "GlobalAverage";
  }
  return "unknown";
}

std::optional<ModelClass> parse_model_class(std::string_view text) {
  if (text == "ZerothOrder" || text == "zeroth") return ModelClass::ZerothOrder;
  if (text == "FirstOrderLocal" || text == "local") return ModelClass::FirstOrderLocal;
  if (text == "GlobalAverage" || text == "global") return ModelClass::GlobalAverage;
  return std::nullopt;
}

TransitionModel::TransitionModel(ModelClass model_class, std::vector<BinVector> rows,
                                 EffectTable effects, std::vector<CountRow> counts,
                                 FitDiagnostics diagnostics)
    : model_class_(model_class),
      rows_(std::move(rows)),
      effects_(effects),
      counts_(std::move(counts)),
      diagnostics_(std::move(diagnostics)) {
  if (rows_.size() != expected_rows(model_class_)) {
    throw Error(ErrorKind::InvalidInput,
                fmt::format("{} model needs {} rows, got {}", to_string(model_class_),
                            expected_rows(model_class_), rows_.size()));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    check_probability_row(rows_[i], fmt::format("transition row {}", i));
  }
  for (const auto& e : effects_) {
    if (!std::isfinite(e.mean) || !(e.stddev >= 0.0) || !std::isfinite(e.stddev)) {
      throw Error(ErrorKind::InvalidInput, "effect parameters must be finite with stddev >= 0");
    }
  }
}

const BinVector& TransitionModel::row(DeltaBin conditioning) const {
  if (model_class_ == ModelClass::ZerothOrder) return rows_.front();
  return rows_[index_of(conditioning)];
}

void TransitionModel::validate_effects(const ScaleConfig& cfg) const {
  for (DeltaBin bin : kAllBins) {
    const auto [lo, hi] = bin_interval(bin, cfg.bin_edges);
    const double mean = effect_mean(bin);
    if (mean < lo || mean > hi) {
      throw Error(ErrorKind::InvalidInput,
                  fmt::format("effect mean {} of {} lies outside its bin", mean, to_string(bin)));
    }
  }
}

EffectParams default_effect(DeltaBin bin, const BinEdges& edges) {
  switch (bin) {
    case DeltaBin::HighDeterioration: return {edges[0] - 1.5, 1.0};
    case DeltaBin::LowDeterioration: return {0.5 * (edges[0] + edges[1]), 1.0};
    case DeltaBin::Flatline: return {0.5 * (edges[1] + edges[2]), 1.0};
    case DeltaBin::LowImprovement: return {0.5 * (edges[2] + edges[3]), 1.0};
    case DeltaBin::HighImprovement: return {edges[3] + 1.5, 1.0};
  }
  return {};
}

TransitionModel fit(const TrajectoryDataset& data, ModelClass model_class,
                    const ScaleConfig& cfg) {
  if (data.trajectories.empty()) throw Error(ErrorKind::Fit, "dataset is empty");

  const std::size_t n_rows = expected_rows(model_class);
  std::vector<CountRow> counts(n_rows, CountRow{});
  std::array<std::vector<double>, kNumBins> deltas_by_bin;
  FitDiagnostics diag;
  diag.trajectories = data.trajectories.size();

  for (const Trajectory& traj : data.trajectories) {
    const auto& s = traj.sessions;
    if (s.empty() || s.front().observation.is_missing()) {
      ++diag.unusable_trajectories;
      continue;
    }
    for (std::size_t t = 1; t < s.size(); ++t) {
      if (s[t].session <= s[t - 1].session) {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("patient {}: sessions are not strictly increasing", traj.patient_id));
      }
    }
    const double baseline = s.front().observation.score().value;
    for (std::size_t t = 0; t + 1 < s.size(); ++t) {
      // A gap in session numbers is an unrecorded, hence missing, reading.
      if (s[t + 1].session != s[t].session + 1 || s[t].observation.is_missing() ||
          s[t + 1].observation.is_missing()) {
        ++diag.pairs_skipped;
        continue;
      }
      const double current = s[t].observation.score().value;
      const double step = s[t + 1].observation.score().value - current;

      std::size_t row = 0;
      if (model_class == ModelClass::FirstOrderLocal) {
        double previous_step = 0.0;
        if (t > 0) {
          if (s[t - 1].session != s[t].session - 1 || s[t - 1].observation.is_missing()) {
            ++diag.pairs_skipped;
            continue;
          }
          previous_step = current - s[t - 1].observation.score().value;
        }
        row = index_of(bin_delta(previous_step, cfg.bin_edges));
      } else if (model_class == ModelClass::GlobalAverage) {
        row = index_of(bin_delta(current - baseline, cfg.bin_edges));
      }

      const DeltaBin next = bin_delta(step, cfg.bin_edges);
      ++counts[row][index_of(next)];
      deltas_by_bin[index_of(next)].push_back(step);
      ++diag.pairs_used;
    }
  }

  if (diag.pairs_used == 0) {
    throw Error(ErrorKind::Fit, "no consecutive pair of observed readings to fit from");
  }

  std::vector<BinVector> rows(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t total = std::accumulate(counts[r].begin(), counts[r].end(), std::size_t{0});
    if (total == 0) {
      rows[r].fill(1.0 / kNumBins);
      diag.smoothed_rows.push_back(bin_at(r));
      continue;
    }
    for (std::size_t n = 0; n < kNumBins; ++n) {
      rows[r][n] = static_cast<double>(counts[r][n]) / static_cast<double>(total);
    }
  }

  EffectTable effects{};
  for (std::size_t n = 0; n < kNumBins; ++n) {
    const auto& xs = deltas_by_bin[n];
    diag.effect_samples[n] = xs.size();
    if (xs.size() < 2) {
      effects[n] = default_effect(bin_at(n), cfg.bin_edges);
      diag.effect_fallbacks.push_back(bin_at(n));
      continue;
    }
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    effects[n] = {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
  }

  return TransitionModel(model_class, std::move(rows), effects, std::move(counts), std::move(diag));
}

BinVector next_bin_distribution(const TransitionModel& model, DeltaBin conditioning,
                                Action action) {
  if (action == Action::Stop) return point_mass(DeltaBin::Flatline);
  return model.row(conditioning);
}

void write_model(std::ostream& out, const TransitionModel& model) {
  fmt::print(out, "model_class {}\n", to_string(model.model_class()));
  for (std::size_t r = 0; r < model.rows().size(); ++r) {
    const auto& row = model.rows()[r];
    const std::string_view label =
        model.model_class() == ModelClass::ZerothOrder ? std::string_view{"Any"} : to_string(bin_at(r));
    fmt::print(out, "row {} {} {} {} {} {}\n", label, row[0], row[1], row[2], row[3], row[4]);
  }
  for (DeltaBin bin : kAllBins) {
    const auto& e = model.effects()[index_of(bin)];
    fmt::print(out, "effect {} {} {}\n", to_string(bin), e.mean, e.stddev);
  }
  for (std::size_t r = 0; r < model.counts().size(); ++r) {
    const auto& c = model.counts()[r];
    fmt::print(out, "count {} {} {} {} {} {}\n", r, c[0], c[1], c[2], c[3], c[4]);
  }
}

TransitionModel read_model(std::istream& in) {
  std::optional<ModelClass> model_class;
  std::vector<BinVector> rows;
  EffectTable effects{};
  std::array<bool, kNumBins> have_effect{};
  std::vector<CountRow> counts;

  std::string line;
  int line_no = 0;
  auto fail = [&](std::string_view why) {
    return Error(ErrorKind::Parse, fmt::format("model line {}: {}", line_no, why));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "model_class") {
      std::string name;
      ls >> name;
      model_class = parse_model_class(name);
      if (!model_class) throw fail("unknown model class");
    } else if (key == "row") {
      std::string label;
      BinVector row{};
      ls >> label >> row[0] >> row[1] >> row[2] >> row[3] >> row[4];
      if (!ls) throw fail("expected a label and five probabilities");
      rows.push_back(row);
    } else if (key == "effect") {
      std::string label;
      EffectParams e;
      ls >> label >> e.mean >> e.stddev;
      const auto bin = parse_delta_bin(label);
      if (!ls || !bin) throw fail("expected a bin name, mean and stddev");
      effects[index_of(*bin)] = e;
      have_effect[index_of(*bin)] = true;
    } else if (key == "count") {
      std::size_t r = 0;
      CountRow c{};
      ls >> r >> c[0] >> c[1] >> c[2] >> c[3] >> c[4];
      if (!ls) throw fail("expected a row index and five counts");
      counts.push_back(c);
    } else {
      throw fail(fmt::format("unknown key '{}'", key));
    }
  }
  if (!model_class) throw Error(ErrorKind::Parse, "model file has no model_class line");
  for (bool seen : have_effect) {
    if (!seen) throw Error(ErrorKind::Parse, "model file lacks an effect line for some bin");
  }
  return TransitionModel(*model_class, std::move(rows), effects, std::move(counts));
}

void write_diagnostics(std::ostream& out, const TransitionModel& model) {
  const auto& d = model.diagnostics();
  fmt::print(out, "model_class {}\n", to_string(model.model_class()));
  fmt::print(out, "trajectories {}\nunusable_trajectories {}\n", d.trajectories,
             d.unusable_trajectories);
  fmt::print(out, "pairs_used {}\npairs_skipped {}\n", d.pairs_used, d.pairs_skipped);
  for (std::size_t r = 0; r < model.counts().size(); ++r) {
    const auto& c = model.counts()[r];
    fmt::print(out, "row_count {} {}\n", r, std::accumulate(c.begin(), c.end(), std::size_t{0}));
  }
  for (DeltaBin bin : d.smoothed_rows) fmt::print(out, "smoothed_row {}\n", to_string(bin));
  for (DeltaBin bin : d.effect_fallbacks) fmt::print(out, "effect_fallback {}\n", to_string(bin));
}

}  // namespace treatsim
