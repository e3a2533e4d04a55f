// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

#include <fmt/core.h>
#include <unistd.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "treatsim/cli/commands.hpp"
#include "treatsim/cli/trajectory_csv.hpp"
#include "treatsim/utility.hpp"

using namespace treatsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void run(int id, std::string_view name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, fmt::format("exception: {}", e.what())};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = secs <= limit_seconds;
  const bool pass = out.ok && in_time;
  if (!pass) ++failures;
  fmt::print("{} {} {} ({:.2f}s, limit {:.0f}s){}{}\n", pass ? "PASS" : "FAIL", id, name, secs, limit_seconds,
             out.detail.empty() ? "" : ": ", out.detail);
  if (!in_time) fmt::print("     over the time limit\n");
  std::fflush(stdout);
}

std::shared_ptr<const TransitionModel> reference_world() {
  return std::make_shared<const TransitionModel>(reference_model(ModelClass::GlobalAverage));
}

ConstructSpec construct(PolicyKind kind, ModelClass mc = ModelClass::GlobalAverage) {
  ConstructSpec c;
  c.name = std::string(to_string(kind));
  c.policy.kind = kind;
  c.model_class = mc;
  return c;
}

// 1. Fixed-length policies.
Outcome structural() {
  SimulationConfig cfg;
  cfg.seed = 1;
  const auto world = reference_world();
  const auto pop = generate_population(cfg, world);
  const ConstructResult raw = run_construct(construct(PolicyKind::RawEffect, ModelClass::ZerothOrder), pop, cfg, {});
  const ConstructResult hs = run_construct(construct(PolicyKind::HardStop), pop, cfg, {});
  const bool ok = raw.mean_services == 8.0 && raw.pct_max_dosage == 100.0 && hs.mean_services == 3.0 &&
                  hs.pct_max_dosage == 0.0;
  return {ok, fmt::format("RawEffect services {:.2f} max {:.0f}%, HardStop services {:.2f} max {:.0f}%",
                          raw.mean_services, raw.pct_max_dosage, hs.mean_services, hs.pct_max_dosage)};
}

// 2. Planner against independent enumeration.
Outcome planner_oracle() {
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  int mismatched_actions = 0, checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ModelClass mc = trial % 3 == 0 ? ModelClass::FirstOrderLocal
                                         : (trial % 3 == 1 ? ModelClass::GlobalAverage : ModelClass::ZerothOrder);
    const TransitionModel m = testing_support::random_fitted_model(rng, mc);
    const int remaining = 1 + trial % 3;
    ScaleConfig cfg;
    cfg.horizon = remaining;
    const Belief b = testing_support::random_belief(rng);
    const double cost = 100.0 * (trial % 4);
    for (BackupMode mode : {BackupMode::Normal, BackupMode::MaxProb}) {
      PlannerSettings s;
      s.mode = mode;
      s.osf = (trial % 5) * 2.0;
      const Plan p = plan(b, 0, cost, m, cfg, s);
      const auto problem = testing_support::to_problem(m, cfg, s);
      const auto state = testing_support::to_state(b, cost);
      const oracle::Choice want = remaining <= 2 ? oracle::enumerate_policies(problem, state, remaining)
                                                 : oracle::expectimax(problem, state, remaining);
      worst = std::max(worst, std::abs(p.root_value - want.value));
      mismatched_actions += (p.root_action == Action::Treat) != want.treat;
      ++checks;
    }
  }
  return {worst <= 1e-9 && mismatched_actions == 0,
          fmt::format("{} plans, max value error {:.3g}, action mismatches {}", checks, worst, mismatched_actions)};
}

// 3. Belief fuzz.
Outcome belief_fuzz() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> score(0.0, 40.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ScaleConfig cfg;
  const EffectTable effects{{{-6, 1}, {-2.5, 1}, {0, 0.5}, {2.5, 1}, {6, 1}}};
  int bad = 0;
  auto sum = [](const BinVector& v) { return v[0] + v[1] + v[2] + v[3] + v[4]; };
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<BinVector> rows;
    for (int i = 0; i < 5; ++i) rows.push_back(testing_support::random_simplex(rng, 0.2));
    const ModelClass mc = trial % 2 ? ModelClass::GlobalAverage : ModelClass::FirstOrderLocal;
    const TransitionModel m(mc, rows, effects);
    std::array<BinVector, kNumBins> obs_rows{};
    for (auto& r : obs_rows) r = testing_support::random_simplex(rng, 0.2);
    const ObservationModel obs(obs_rows);

    Belief b = Belief::at_intake(OutcomeScore{score(rng)});
    b.expected_score = OutcomeScore{score(rng)};
    b.previous_score = OutcomeScore{score(rng)};
    Belief b1 = b, b2 = b, mix = b;
    b1.probs = testing_support::random_simplex(rng, 0.3);
    b2.probs = testing_support::random_simplex(rng, 0.3);
    const double w = unit(rng);
    for (std::size_t i = 0; i < 5; ++i) mix.probs[i] = w * b1.probs[i] + (1 - w) * b2.probs[i];

    const Belief p = predict(mix, Action::Treat, m, cfg);
    const Belief p1 = predict(b1, Action::Treat, m, cfg);
    const Belief p2 = predict(b2, Action::Treat, m, cfg);
    bool ok = std::abs(sum(p.probs) - 1.0) <= 1e-9;
    for (std::size_t i = 0; i < 5; ++i) {
      ok &= std::abs(p.probs[i] - (w * p1.probs[i] + (1 - w) * p2.probs[i])) <= 1e-9;
    }

    const Observation reading = Observation::of(OutcomeScore{score(rng)});
    const Belief u = update(p, reading, obs, mc, cfg);
    ok &= std::abs(sum(u.probs) - 1.0) <= 1e-9;
    for (double x : u.probs) ok &= x >= 0.0;

    const Belief same = update(p, Observation::missing(), obs, mc, cfg);
    ok &= same.probs == p.probs && same.expected_score == p.expected_score &&
          same.previous_score == p.previous_score && same.baseline_score == p.baseline_score;

    const Belief collapsed = update(p, reading, ObservationModel::identity(), mc, cfg);
    ok &= collapsed.probs == point_mass(observed_bin(p, reading.score(), mc, cfg));
    bad += !ok;
  }
  return {bad == 0, fmt::format("10000 triples, {} violations", bad)};
}

// 4. Cost per unit change continuity and monotonicity.
Outcome cpuc_shape() {
  bool ok = true;
  for (double cost : {0.0, 100.0, 300.0, 800.0}) {
    const double at_one = cost / 1.0;
    const double penalty = cost + (1.0 - 1.0) * 100.0;
    ok &= std::abs(at_one - penalty) <= 1e-9 && std::abs(cpuc(cost, 1.0, 100.0) - at_one) <= 1e-9;
    ok &= std::abs(cpuc(cost, 1.0 - 1e-12, 100.0) - at_one) <= 1e-9;
  }
  int violations = 0;
  double prev = cpuc(500.0, -20.0, 100.0);
  for (int i = 1; i < 1000; ++i) {
    const double d = -20.0 + 60.0 * i / 999.0;
    const double v = cpuc(500.0, d, 100.0);
    violations += !(v < prev);
    prev = v;
  }
  return {ok && violations == 0, fmt::format("continuity {}, {} non-decreasing steps", ok ? "ok" : "broken", violations)};
}

// 5. Ordering of the decision models on a global-model world.
Outcome policy_ordering() {
  const auto world = reference_world();
  PlannerModels models{{ModelClass::GlobalAverage, world}};
  int holds = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimulationConfig cfg;
    cfg.seed = seed;
    const auto pop = generate_population(cfg, world);
    const auto mdp = run_construct(construct(PolicyKind::Mdp), pop, cfg, models);
    const auto mi = run_construct(construct(PolicyKind::MaxImprove), pop, cfg, models);
    const auto raw = run_construct(construct(PolicyKind::RawEffect, ModelClass::ZerothOrder), pop, cfg, models);
    const auto hs = run_construct(construct(PolicyKind::HardStop), pop, cfg, models);
    const bool ok = mdp.mean_cpuc < mi.mean_cpuc && mi.mean_cpuc < raw.mean_cpuc &&
                    raw.mean_final_delta > hs.mean_final_delta && mdp.mean_final_delta > hs.mean_final_delta;
    holds += ok;
    detail += fmt::format("{}seed {}: cpuc {:.1f}/{:.1f}/{:.1f} delta mdp {:.2f} raw {:.2f} hs {:.2f}{}",
                          detail.empty() ? "" : "; ", seed, mdp.mean_cpuc, mi.mean_cpuc, raw.mean_cpuc,
                          mdp.mean_final_delta, raw.mean_final_delta, hs.mean_final_delta, ok ? "" : " (violated)");
  }
  return {holds >= 4, fmt::format("holds on {}/5 [{}]", holds, detail)};
}

// 6. Outcome scaling sweep.
Outcome osf_trend() {
  const auto world = reference_world();
  PlannerModels models{{ModelClass::GlobalAverage, world}};
  SimulationConfig cfg;
  cfg.seed = 7;
  const auto pop = generate_population(cfg, world);
  const auto sweep = sweep_osf(construct(PolicyKind::Mdp), {0, 1, 2, 3, 4, 5, 6, 10}, pop, cfg, models);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& r = sweep[i].second;
    if (i > 0) {
      const auto& p = sweep[i - 1].second;
      ok &= r.mean_final_delta >= p.mean_final_delta - 0.05;
      ok &= r.mean_cpuc >= p.mean_cpuc - 2.0;
    }
    detail += fmt::format("{}osf {}: {:.2f}/{:.3f}", i ? ", " : "", sweep[i].first, r.mean_cpuc, r.mean_final_delta);
  }
  return {ok, detail};
}

// A world that pulls the score back towards the baseline so every
// conditioning row is visited often.
TransitionModel recovery_world(ModelClass mc) {
  const EffectTable effects{{{-6.5, 1.5}, {-2.5, 0.8}, {0.0, 0.5}, {2.5, 0.8}, {6.5, 1.5}}};
  if (mc == ModelClass::ZerothOrder) {
    return TransitionModel(mc, {BinVector{0.12, 0.18, 0.30, 0.25, 0.15}}, effects);
  }
  return TransitionModel(mc,
                         {BinVector{0.04, 0.08, 0.18, 0.30, 0.40}, BinVector{0.08, 0.14, 0.24, 0.30, 0.24},
                          BinVector{0.20, 0.20, 0.20, 0.20, 0.20}, BinVector{0.24, 0.30, 0.24, 0.14, 0.08},
                          BinVector{0.40, 0.30, 0.18, 0.08, 0.04}},
                         effects);
}

fs::path scratch_dir(std::string_view tag) {
  const fs::path dir = fs::temp_directory_path() / fmt::format("treatsim-accept-{}-{}", ::getpid(), tag);
  fs::create_directories(dir);
  return dir;
}

// 7. Fit recovery from 10,000 simulated transitions.
Outcome fit_recovery() {
  const fs::path dir = scratch_dir("fit");
  double worst = 0.0;
  std::string detail;
  std::uint64_t seed = 11;
  for (ModelClass mc : {ModelClass::ZerothOrder, ModelClass::FirstOrderLocal, ModelClass::GlobalAverage}) {
    auto world = std::make_shared<const TransitionModel>(recovery_world(mc));
    SimulationConfig cfg;
    cfg.scale.score_max = OutcomeScore{100.0};
    cfg.baseline_mean = 50.0;
    cfg.baseline_std = 5.0;
    cfg.p_missing = 0.0;
    cfg.population_size = 1250;
    cfg.seed = seed++;
    std::vector<EpisodeState> eps;
    for (const auto& p : generate_population(cfg, world)) {
      eps.push_back(run_episode(p, PolicySpec{PolicyKind::RawEffect}, nullptr, cfg));
    }
    const fs::path csv = dir / fmt::format("{}.csv", to_string(mc));
    cli::write_trajectories(csv, to_dataset(eps));
    const TransitionModel fitted = fit(cli::read_trajectories(csv), mc, cfg.scale);
    double class_worst = 0.0;
    for (std::size_t r = 0; r < world->rows().size(); ++r) {
      for (std::size_t n = 0; n < kNumBins; ++n) {
        class_worst = std::max(class_worst, std::abs(fitted.rows()[r][n] - world->rows()[r][n]));
      }
    }
    worst = std::max(worst, class_worst);
    detail += fmt::format("{}{} {} pairs, max error {:.4f}", detail.empty() ? "" : "; ", to_string(mc),
                          fitted.diagnostics().pairs_used, class_worst);
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {worst <= 0.05, detail};
}

// 8. Full-horizon tree.
Outcome tree_scale() {
  const std::size_t expected = tree_size(8);
  const auto world = reference_world();
  const ScaleConfig cfg;
  const Belief b = Belief::at_intake(OutcomeScore{20});
  const SearchTree tree = expand_tree(b, 0, 0.0, *world, cfg);
  const Plan p = plan(b, 0, 0.0, *world, cfg);
  const bool ok = expected > 100000 && tree.size() == expected && p.node_count == expected &&
                  std::abs(tree.root().value - p.root_value) <= 1e-9;
  return {ok, fmt::format("tree_size(8) = {}, expanded {} nodes, root {} value {:.4f}", expected, tree.size(),
                          to_string(p.root_action), p.root_value)};
}

// 9. Byte-identical simulate output.
Outcome determinism() {
  const fs::path dir = scratch_dir("sim");
  const fs::path conf = fs::path(TREATSIM_SOURCE_DIR) / "tools" / "configs" / "policy_comparison.conf";
  cli::SimulateArgs args;
  args.config = conf;
  args.output_dir = dir / "a";
  cli::cmd_simulate(args);
  args.output_dir = dir / "b";
  cli::cmd_simulate(args);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = slurp(dir / "a" / "results.csv");
  const std::string b = slurp(dir / "b" / "results.csv");
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {!a.empty() && a == b, fmt::format("{} bytes, {}", a.size(), a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  run(1, "structural exactness", 1, structural);
  run(2, "planner oracle", 30, planner_oracle);
  run(3, "belief correctness", 10, belief_fuzz);
  run(4, "cost per unit change continuity and ordering", 1, cpuc_shape);
  run(5, "policy ordering", 120, policy_ordering);
  run(6, "outcome scaling trend", 180, osf_trend);
  run(7, "fit recovery", 30, fit_recovery);
  run(8, "worst-case tree scale", 60, tree_scale);
  run(9, "determinism", 120, determinism);
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
