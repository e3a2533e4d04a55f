#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "treatsim/cli/commands.hpp"
#include "treatsim/error.hpp"

using namespace treatsim;

int main(int argc, char** argv) {
  CLI::App app{"Simulate treatment-continuation policies over patient cohorts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kToolVersion));

  cli::FitArgs fit_args;
  std::string fit_class = "global";
  auto* fit_cmd = app.add_subcommand("fit", "Fit a transition model from a trajectory CSV");
  fit_cmd->add_option("input", fit_args.input_csv, "Trajectory CSV (patient_id,session,score,cost)")
      ->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("-m,--model-class", fit_class, "zeroth | local | global");
  fit_cmd->add_option("-o,--output", fit_args.output, "Model file to write")->required();
  fit_cmd->add_option("--diagnostics", fit_args.diagnostics, "Diagnostics file (default <output>.diag)");

  cli::SimulateArgs sim_args;
  std::uint64_t sim_seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Run every construct of a config over one cohort");
  sim_cmd->add_option("config", sim_args.config, "Run configuration")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("-o,--output-dir", sim_args.output_dir, "Output directory")->required();
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Override the configured seed");
  sim_cmd->add_flag("-v,--verbose", sim_args.verbose, "Include per-episode records in results.json");

  cli::SweepArgs sweep_args;
  std::uint64_t sweep_seed = 0;
  std::string osf_list;
  std::vector<std::string> modes;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep the outcome scaling factor of an MDP construct");
  sweep_cmd->add_option("config", sweep_args.config, "Run configuration")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("-o,--output-dir", sweep_args.output_dir, "Output directory")->required();
  sweep_cmd->add_option("--osf", osf_list, "Comma list or start:stop:step (default 0:15:1)");
  sweep_cmd->add_option("--mode", modes, "normal | maxprob (repeatable)");
  sweep_cmd->add_option("--construct", sweep_args.construct, "Construct name (default first MDP construct)");
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "Override the configured seed");

  cli::ExportArgs export_args;
  std::uint64_t export_seed = 0;
  auto* export_cmd = app.add_subcommand("export-trajectories", "Write simulated trajectories as CSV");
  export_cmd->add_option("config", export_args.config, "Run configuration")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("-o,--output", export_args.output_csv, "CSV file to write")->required();
  export_cmd->add_option("--construct", export_args.construct, "Construct whose policy generates episodes");
  auto* export_seed_opt = export_cmd->add_option("--seed", export_seed, "Override the configured seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      const auto mc = parse_model_class(fit_class);
      if (!mc) throw Error(ErrorKind::InvalidInput, fmt::format("unknown model class '{}'", fit_class));
      fit_args.model_class = *mc;
      const auto model = cli::cmd_fit(fit_args);
      fmt::print("fitted {} model from {} trajectories ({} pairs)\n", to_string(model.model_class()),
                 model.diagnostics().trajectories, model.diagnostics().pairs_used);
    } else if (*sim_cmd) {
      if (*sim_seed_opt) sim_args.seed = sim_seed;
      for (const auto& [spec, r] : cli::cmd_simulate(sim_args)) {
        fmt::print("{:<28} cpuc {:>9.2f}  delta {:>6.2f}  services {:>5.2f}  max-dosage {:>6.2f}%\n", spec.name,
                   r.mean_cpuc, r.mean_final_delta, r.mean_services, r.pct_max_dosage);
      }
    } else if (*sweep_cmd) {
      if (*sweep_seed_opt) sweep_args.seed = sweep_seed;
      if (!osf_list.empty()) sweep_args.osf_values = cli::parse_osf_list(osf_list);
      if (!modes.empty()) {
        sweep_args.modes.clear();
        for (const auto& m : modes) {
          if (m == "normal") sweep_args.modes.push_back(BackupMode::Normal);
          else if (m == "maxprob") sweep_args.modes.push_back(BackupMode::MaxProb);
          else throw Error(ErrorKind::InvalidInput, fmt::format("unknown mode '{}'", m));
        }
      }
      for (const auto& row : cli::cmd_sweep(sweep_args)) {
        fmt::print("{:<8} osf {:>6.2f}  cpuc {:>9.2f}  delta {:>6.2f}  services {:>5.2f}\n", to_string(row.mode),
                   row.osf, row.result.mean_cpuc, row.result.mean_final_delta, row.result.mean_services);
      }
    } else if (*export_cmd) {
      if (*export_seed_opt) export_args.seed = export_seed;
      cli::cmd_export(export_args);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error ({}): {}\n", to_string(e.kind()), e.what());
    return cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
