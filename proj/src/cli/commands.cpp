#include "treatsim/cli/commands.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include "json.hpp"

#include "treatsim/cli/trajectory_csv.hpp"
#include "treatsim/error.hpp"

namespace treatsim::cli {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const RunConfig& cfg, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() || cfg.base_dir.empty() ? p : cfg.base_dir / p;
}

RunConfig load_with_seed(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_run_config(path);
  if (seed) cfg.sim.seed = *seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

json construct_json(const ConstructSpec& c) {
  return json{{"name", c.name},
              {"policy", c.effective_policy().label()},
              {"model_class", to_string(c.model_class)},
              {"include_missing", c.include_missing},
              {"osf", c.osf},
              {"replications", c.replications}};
}

json result_json(const ConstructResult& r, bool verbose) {
  json j{{"cpuc", r.mean_cpuc},
         {"cpuc_ratio_of_means", r.ratio_cpuc},
         {"avg_final_delta", r.mean_final_delta},
         {"std_final_delta", r.std_final_delta},
         {"avg_services", r.mean_services},
         {"pct_max_dosage", r.pct_max_dosage}};
  json reps = json::array();
  for (const auto& m : r.replications) {
    reps.push_back({{"cpuc", m.mean_cpuc},
                    {"avg_final_delta", m.mean_final_delta},
                    {"std_final_delta", m.std_final_delta},
                    {"avg_services", m.mean_services},
                    {"pct_max_dosage", m.pct_max_dosage}});
  }
  j["replications"] = std::move(reps);
  if (verbose) {
    json eps = json::array();
    for (const auto& e : r.episodes) {
      eps.push_back({{"patient_id", e.patient_id},
                     {"replication", e.replication},
                     {"total_cost", e.total_cost},
                     {"final_delta", e.final_delta},
                     {"sessions_used", e.sessions_used},
                     {"max_dosage", e.max_dosage},
                     {"cpuc", e.cpuc}});
    }
    j["episodes"] = std::move(eps);
  }
  return j;
}

void write_manifest(const std::filesystem::path& dir, std::string_view command,
                    const std::filesystem::path& config_path, const RunConfig& cfg,
                    const std::vector<std::string>& outputs) {
  json constructs = json::array();
  for (const auto& c : cfg.constructs) constructs.push_back(construct_json(c));
  const json manifest{{"tool", "treatsim"},
                      {"tool_version", kToolVersion},
                      {"command", command},
                      {"config_path", config_path.string()},
                      {"output_dir", dir.string()},
                      {"seed", cfg.sim.seed},
                      {"resolved_config", format_run_config(cfg)},
                      {"constructs", constructs},
                      {"outputs", outputs}};
  auto out = open_output(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

const ConstructSpec& pick_construct(const RunConfig& cfg, const std::string& name, bool want_mdp) {
  for (const ConstructSpec& c : cfg.constructs) {
    if (!name.empty() ? c.name == name : (!want_mdp || c.policy.kind == PolicyKind::Mdp)) return c;
  }
  if (!name.empty()) throw Error(ErrorKind::Config, fmt::format("no construct named '{}'", name));
  throw Error(ErrorKind::Config, "config has no MDP construct to sweep");
}

}  // namespace

std::shared_ptr<const TransitionModel> load_world_model(const RunConfig& cfg) {
  constexpr std::string_view kPrefix = "reference:";
  if (cfg.world_model.starts_with(kPrefix)) {
    const auto mc = parse_model_class(std::string_view(cfg.world_model).substr(kPrefix.size()));
    if (!mc) throw Error(ErrorKind::Config, fmt::format("unknown world model '{}'", cfg.world_model));
    return std::make_shared<const TransitionModel>(reference_model(*mc));
  }
  const auto path = resolve(cfg, cfg.world_model);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open world model {}", path.string()));
  return std::make_shared<const TransitionModel>(read_model(in));
}

TrajectoryDataset training_data(const RunConfig& cfg, const TransitionModel& world) {
  if (!cfg.training_csv.empty()) return read_trajectories(resolve(cfg, cfg.training_csv));

  SimulationConfig train = cfg.sim;
  train.seed = derive_seed(cfg.sim.seed, Stream::Training);
  train.population_size = cfg.training_patients;
  auto world_ptr = std::make_shared<const TransitionModel>(world);
  const auto cohort = generate_population(train, world_ptr);
  const PolicySpec always_treat{PolicyKind::RawEffect};
  std::vector<EpisodeState> episodes;
  episodes.reserve(cohort.size());
  for (const PatientAgent& p : cohort) episodes.push_back(run_episode(p, always_treat, nullptr, train));
  return to_dataset(episodes);
}

RunContext prepare_run(const RunConfig& cfg) {
  RunContext ctx;
  ctx.world = load_world_model(cfg);
  ctx.world->validate_effects(cfg.sim.scale);

  std::set<ModelClass> needed;
  for (const ConstructSpec& c : cfg.constructs) {
    if (c.effective_policy().needs_model()) needed.insert(c.model_class);
  }
  std::optional<TrajectoryDataset> training;
  for (ModelClass mc : needed) {
    if (cfg.planner_source == PlannerSource::World && mc == ctx.world->model_class()) {
      ctx.planner_models[mc] = ctx.world;
      continue;
    }
    if (!training) training = training_data(cfg, *ctx.world);
    ctx.planner_models[mc] = std::make_shared<const TransitionModel>(fit(*training, mc, cfg.sim.scale));
  }
  ctx.population = generate_population(cfg.sim, ctx.world);
  return ctx;
}

TransitionModel cmd_fit(const FitArgs& args) {
  const TrajectoryDataset data = read_trajectories(args.input_csv);
  const ScaleConfig scale;
  TransitionModel model = fit(data, args.model_class, scale);
  {
    auto out = open_output(args.output);
    write_model(out, model);
  }
  const auto diag_path =
      args.diagnostics.empty() ? std::filesystem::path(args.output.string() + ".diag") : args.diagnostics;
  auto diag = open_output(diag_path);
  write_diagnostics(diag, model);
  return model;
}

std::vector<std::pair<ConstructSpec, ConstructResult>> cmd_simulate(const SimulateArgs& args) {
  const RunConfig cfg = load_with_seed(args.config, args.seed);
  const RunContext ctx = prepare_run(cfg);
  CohortOptions options;
  options.episode.tuning = cfg.tuning;

  std::vector<std::pair<ConstructSpec, ConstructResult>> rows;
  for (const ConstructSpec& c : cfg.constructs) {
    rows.emplace_back(c, run_construct(c, ctx.population, cfg.sim, ctx.planner_models, options));
  }

  ensure_dir(args.output_dir);
  {
    auto out = open_output(args.output_dir / "results.csv");
    write_results_csv(out, rows);
  }
  json results = json::array();
  for (const auto& [spec, r] : rows) {
    json entry = construct_json(spec);
    entry["metrics"] = result_json(r, args.verbose);
    results.push_back(std::move(entry));
  }
  {
    auto out = open_output(args.output_dir / "results.json");
    out << results.dump(2) << '\n';
  }
  write_manifest(args.output_dir, "simulate", args.config, cfg, {"results.csv", "results.json"});
  return rows;
}

std::vector<SweepRow> cmd_sweep(const SweepArgs& args) {
  const RunConfig cfg = load_with_seed(args.config, args.seed);
  ConstructSpec base = pick_construct(cfg, args.construct, true);
  if (base.policy.kind != PolicyKind::Mdp) {
    throw Error(ErrorKind::Config, fmt::format("construct '{}' is not an MDP construct", base.name));
  }
  std::vector<double> osf_values = args.osf_values;
  if (osf_values.empty()) osf_values = parse_osf_list("0:15:1");

  RunConfig sweep_cfg = cfg;
  sweep_cfg.constructs = {base};
  const RunContext ctx = prepare_run(sweep_cfg);
  CohortOptions options;
  options.episode.tuning = cfg.tuning;

  std::vector<SweepRow> rows;
  for (BackupMode mode : args.modes) {
    ConstructSpec spec = base;
    spec.policy.mode = mode;
    for (auto& [osf, result] : sweep_osf(spec, osf_values, ctx.population, cfg.sim, ctx.planner_models, options)) {
      rows.push_back(SweepRow{mode, osf, std::move(result)});
    }
  }

  ensure_dir(args.output_dir);
  {
    auto out = open_output(args.output_dir / "sweep.csv");
    out << "mode,osf,cpuc,avg_final_delta,std_final_delta,avg_services,pct_max_dosage\n";
    for (const SweepRow& r : rows) {
      fmt::print(out, "{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.2f}\n", to_string(r.mode), r.osf,
                 r.result.mean_cpuc, r.result.mean_final_delta, r.result.std_final_delta,
                 r.result.mean_services, r.result.pct_max_dosage);
    }
  }
  write_manifest(args.output_dir, "sweep", args.config, sweep_cfg, {"sweep.csv"});
  return rows;
}

void cmd_export(const ExportArgs& args) {
  const RunConfig cfg = load_with_seed(args.config, args.seed);
  PolicySpec policy{PolicyKind::RawEffect};
  SimulationConfig sim = cfg.sim;
  RunConfig run_cfg = cfg;
  if (!args.construct.empty()) {
    const ConstructSpec& c = pick_construct(cfg, args.construct, false);
    policy = c.effective_policy();
    if (!c.include_missing) sim.p_missing = 0.0;
    run_cfg.constructs = {c};
  }
  const RunContext ctx = prepare_run(run_cfg);
  const TransitionModel* model = nullptr;
  if (policy.needs_model()) model = ctx.planner_models.at(policy.model_class).get();

  EpisodeOptions options;
  options.tuning = cfg.tuning;
  std::vector<EpisodeState> episodes;
  episodes.reserve(ctx.population.size());
  for (const PatientAgent& p : ctx.population) {
    episodes.push_back(run_episode(p, policy, model, sim, options));
  }
  write_trajectories(args.output_csv, to_dataset(episodes));
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return 2;
    case ErrorKind::Config: return 3;
    case ErrorKind::Parse: return 4;
    case ErrorKind::Fit: return 5;
    case ErrorKind::Capacity: return 6;
    case ErrorKind::HorizonReached: return 7;
    case ErrorKind::Io: return 8;
  }
  return 1;
}

}  // namespace treatsim::cli
