#include "treatsim/cli/run_config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "treatsim/error.hpp"

namespace treatsim::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class LineError {
 public:
  explicit LineError(int line) : line_(line) {}
  Error operator()(std::string_view why) const {
    return Error(ErrorKind::Config, fmt::format("config line {}: {}", line_, why));
  }

 private:
  int line_;
};

double to_double(std::string_view v, const LineError& fail) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(x)) {
    throw fail(fmt::format("'{}' is not a number", v));
  }
  return x;
}

template <typename Int>
Int to_int(std::string_view v, const LineError& fail) {
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw fail(fmt::format("'{}' is not an integer", v));
  }
  return x;
}

bool to_bool(std::string_view v, const LineError& fail) {
  if (v == "yes" || v == "true" || v == "1") return true;
  if (v == "no" || v == "false" || v == "0") return false;
  throw fail(fmt::format("'{}' is not yes/no", v));
}

struct ConstructDraft {
  ConstructSpec spec;
  bool replications_set = false;
  int line = 0;
};

void apply_global(RunConfig& cfg, std::string_view key, std::string_view value,
                  const LineError& fail) {
  auto& sim = cfg.sim;
  if (key == "seed") sim.seed = to_int<std::uint64_t>(value, fail);
  else if (key == "population_size") sim.population_size = to_int<int>(value, fail);
  else if (key == "p_missing") sim.p_missing = to_double(value, fail);
  else if (key == "horizon") sim.scale.horizon = to_int<int>(value, fail);
  else if (key == "cps") sim.scale.cps = to_double(value, fail);
  else if (key == "score_min") sim.scale.score_min.value = to_double(value, fail);
  else if (key == "score_max") sim.scale.score_max.value = to_double(value, fail);
  else if (key == "bin_edges") {
    std::size_t i = 0;
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      if (i == 4) throw fail("bin_edges takes exactly four values");
      sim.scale.bin_edges[i++] = to_double(trim(rest.substr(0, comma)), fail);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (i != 4) throw fail("bin_edges takes exactly four values");
  } else if (key == "baseline_mean") sim.baseline_mean = to_double(value, fail);
  else if (key == "baseline_std") sim.baseline_std = to_double(value, fail);
  else if (key == "world_model") cfg.world_model = std::string(value);
  else if (key == "planner_models") {
    if (value == "world") cfg.planner_source = PlannerSource::World;
    else if (value == "fit") cfg.planner_source = PlannerSource::Fit;
    else throw fail("planner_models must be 'world' or 'fit'");
  } else if (key == "training_patients") cfg.training_patients = to_int<int>(value, fail);
  else if (key == "training_csv") cfg.training_csv = std::string(value);
  else if (key == "osf_scale") cfg.tuning.osf_scale = to_double(value, fail);
  else if (key == "delta_max_floor") cfg.tuning.delta_max_floor = to_double(value, fail);
  else if (key == "node_budget") cfg.tuning.node_budget = to_int<std::size_t>(value, fail);
  else throw fail(fmt::format("unknown key '{}'", key));
}

void apply_construct(ConstructDraft& draft, std::string_view key, std::string_view value,
                     const LineError& fail) {
  auto& spec = draft.spec;
  if (key == "name") spec.name = std::string(value);
  else if (key == "policy") {
    const auto kind = parse_policy_kind(value);
    if (!kind) throw fail(fmt::format("unknown policy '{}'", value));
    spec.policy.kind = *kind;
  } else if (key == "stop_after") spec.policy.stop_after = to_int<int>(value, fail);
  else if (key == "mode") {
    if (value == "normal" || value == "Normal") spec.policy.mode = BackupMode::Normal;
    else if (value == "maxprob" || value == "MaxProb") spec.policy.mode = BackupMode::MaxProb;
    else throw fail("mode must be 'normal' or 'maxprob'");
  } else if (key == "model") {
    const auto mc = parse_model_class(value);
    if (!mc) throw fail(fmt::format("unknown model class '{}'", value));
    spec.model_class = *mc;
  } else if (key == "missing") spec.include_missing = to_bool(value, fail);
  else if (key == "osf") spec.osf = to_double(value, fail);
  else if (key == "replications") {
    spec.replications = to_int<int>(value, fail);
    draft.replications_set = true;
  } else throw fail(fmt::format("unknown construct key '{}'", key));
}

std::string model_token(ModelClass mc) {
  switch (mc) {
    case ModelClass::ZerothOrder: return "zeroth";
    case ModelClass::FirstOrderLocal: return "local";
    case ModelClass::GlobalAverage: return "global";
  }
  return "global";
}

}  // namespace

void RunConfig::validate() const {
  sim.validate();
  if (constructs.empty()) throw Error(ErrorKind::Config, "config lists no constructs");
  if (training_patients < 1) throw Error(ErrorKind::Config, "training_patients must be >= 1");
  if (!(tuning.osf_scale >= 0.0)) throw Error(ErrorKind::Config, "osf_scale must be >= 0");
  if (!(tuning.delta_max_floor > 0.0)) throw Error(ErrorKind::Config, "delta_max_floor must be > 0");
  for (const ConstructSpec& c : constructs) c.validate();
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  std::vector<ConstructDraft> drafts;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const LineError fail(line_no);
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[construct]") throw fail(fmt::format("unknown section {}", line));
      drafts.push_back(ConstructDraft{});
      drafts.back().line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (drafts.empty()) apply_global(cfg, key, value, fail);
    else apply_construct(drafts.back(), key, value, fail);
  }
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    ConstructDraft& d = drafts[i];
    if (d.spec.name.empty()) d.spec.name = fmt::format("construct{}", i + 1);
    if (!d.replications_set && d.spec.policy.kind == PolicyKind::Probabilistic) {
      d.spec.replications = 10;
    }
    cfg.constructs.push_back(d.spec);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open config {}", path.string()));
  try {
    return parse_run_config(in, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string format_run_config(const RunConfig& cfg) {
  const auto& s = cfg.sim;
  std::string out;
  auto line = [&](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("seed", s.seed);
  line("population_size", s.population_size);
  line("p_missing", s.p_missing);
  line("horizon", s.scale.horizon);
  line("cps", s.scale.cps);
  line("score_min", s.scale.score_min.value);
  line("score_max", s.scale.score_max.value);
  line("bin_edges", fmt::format("{},{},{},{}", s.scale.bin_edges[0], s.scale.bin_edges[1],
                                s.scale.bin_edges[2], s.scale.bin_edges[3]));
  line("baseline_mean", s.baseline_mean);
  line("baseline_std", s.baseline_std);
  line("world_model", cfg.world_model);
  line("planner_models", cfg.planner_source == PlannerSource::World ? "world" : "fit");
  line("training_patients", cfg.training_patients);
  if (!cfg.training_csv.empty()) line("training_csv", cfg.training_csv);
  line("osf_scale", cfg.tuning.osf_scale);
  line("delta_max_floor", cfg.tuning.delta_max_floor);
  line("node_budget", cfg.tuning.node_budget);
  for (const ConstructSpec& c : cfg.constructs) {
    out += "\n[construct]\n";
    line("name", c.name);
    line("policy", to_string(c.policy.kind));
    if (c.policy.kind == PolicyKind::HardStop) line("stop_after", c.policy.stop_after);
    if (c.policy.kind == PolicyKind::Mdp) line("mode", to_string(c.policy.mode));
    line("model", model_token(c.model_class));
    line("missing", c.include_missing ? "yes" : "no");
    line("osf", c.osf);
    line("replications", c.replications);
  }
  return out;
}

std::vector<double> parse_osf_list(std::string_view text) {
  const LineError fail(0);
  auto as_number = [&](std::string_view v) {
    try {
      return to_double(trim(v), fail);
    } catch (const Error&) {
      throw Error(ErrorKind::Config, fmt::format("osf list: '{}' is not a number", v));
    }
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string_view::npos) throw Error(ErrorKind::Config, "osf range must be start:stop:step");
    const double start = as_number(text.substr(0, a));
    const double stop = as_number(text.substr(a + 1, b - a - 1));
    const double step = as_number(text.substr(b + 1));
    if (!(step > 0.0) || stop < start) throw Error(ErrorKind::Config, "osf range is empty");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    out.push_back(as_number(rest.substr(0, comma)));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (out.empty()) throw Error(ErrorKind::Config, "osf list is empty");
  return out;
}

}  // namespace treatsim::cli
