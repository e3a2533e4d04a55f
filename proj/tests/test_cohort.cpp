#include <cmath>
#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "treatsim/cohort.hpp"
#include "treatsim/error.hpp"
#include "treatsim/utility.hpp"

using namespace treatsim;

namespace {

std::shared_ptr<const TransitionModel> world() {
  return std::make_shared<const TransitionModel>(reference_model(ModelClass::GlobalAverage));
}

std::shared_ptr<const TransitionModel> frozen_world() {
  const EffectTable effects{{{-6, 0}, {-2.5, 0}, {0, 0}, {2.5, 0}, {6, 0}}};
  return std::make_shared<const TransitionModel>(
      ModelClass::GlobalAverage, std::vector<BinVector>(5, point_mass(DeltaBin::Flatline)), effects);
}

ConstructSpec construct(PolicyKind kind, ModelClass mc = ModelClass::GlobalAverage) {
  ConstructSpec c;
  c.name = "c";
  c.policy.kind = kind;
  c.model_class = mc;
  return c;
}

struct Fixture {
  SimulationConfig cfg;
  std::shared_ptr<const TransitionModel> w = world();
  std::vector<PatientAgent> pop;
  PlannerModels models;
  Fixture(int n = 100, std::uint64_t seed = 3) {
    cfg.population_size = n;
    cfg.seed = seed;
    pop = generate_population(cfg, w);
    models[ModelClass::GlobalAverage] = w;
  }
};

}  // namespace

TEST_CASE("fixed-length policies have exact service metrics") {
  Fixture f;
  const ConstructResult raw = run_construct(construct(PolicyKind::RawEffect), f.pop, f.cfg, f.models);
  CHECK(raw.mean_services == 8.0);
  CHECK(raw.pct_max_dosage == 100.0);
  const ConstructResult hs = run_construct(construct(PolicyKind::HardStop), f.pop, f.cfg, f.models);
  CHECK(hs.mean_services == 3.0);
  CHECK(hs.pct_max_dosage == 0.0);
  CHECK(hs.episodes.size() == f.pop.size());
}

TEST_CASE("a frozen patient pays the flat-outcome penalty") {
  SimulationConfig cfg;
  cfg.population_size = 1;
  const auto pop = generate_population(cfg, frozen_world());
  ConstructSpec c = construct(PolicyKind::HardStop);
  c.policy.stop_after = 2;
  const ConstructResult r = run_construct(c, pop, cfg, {});
  CHECK(r.mean_cpuc == doctest::Approx(300.0));
  CHECK(r.mean_final_delta == 0.0);
  CHECK(r.std_final_delta == 0.0);
}

TEST_CASE("aggregates agree with a recomputation from the episodes") {
  Fixture f(150, 11);
  const ConstructResult r = run_construct(construct(PolicyKind::Mdp), f.pop, f.cfg, f.models);
  double sum_cpuc = 0, sum_delta = 0, sum_cost = 0, sum_services = 0;
  int full = 0;
  for (const auto& e : r.episodes) {
    const double expect = e.final_delta >= 1.0 ? e.total_cost / e.final_delta
                                               : e.total_cost + (1.0 - e.final_delta) * 100.0;
    CHECK(e.cpuc == doctest::Approx(expect));
    sum_cpuc += e.cpuc;
    sum_delta += e.final_delta;
    sum_cost += e.total_cost;
    sum_services += e.sessions_used;
    full += e.sessions_used == 8;
    CHECK(e.max_dosage == (e.sessions_used == 8));
  }
  const double n = static_cast<double>(r.episodes.size());
  const double mean_delta = sum_delta / n;
  double ss = 0;
  for (const auto& e : r.episodes) ss += (e.final_delta - mean_delta) * (e.final_delta - mean_delta);
  CHECK(r.mean_cpuc == doctest::Approx(sum_cpuc / n));
  CHECK(r.mean_final_delta == doctest::Approx(mean_delta));
  CHECK(r.std_final_delta == doctest::Approx(std::sqrt(ss / n)));
  CHECK(r.mean_services == doctest::Approx(sum_services / n));
  CHECK(r.pct_max_dosage == doctest::Approx(100.0 * full / n));
  CHECK(r.ratio_cpuc == doctest::Approx(cpuc(sum_cost / n, mean_delta, 100.0)));
}

TEST_CASE("runs are deterministic") {
  Fixture f(80, 5);
  for (PolicyKind k : {PolicyKind::Probabilistic, PolicyKind::Mdp, PolicyKind::MaxImprove}) {
    const ConstructResult a = run_construct(construct(k), f.pop, f.cfg, f.models);
    const ConstructResult b = run_construct(construct(k), f.pop, f.cfg, f.models);
    CHECK(a.mean_cpuc == b.mean_cpuc);
    CHECK(a.mean_final_delta == b.mean_final_delta);
  }
}

TEST_CASE("replications draw fresh missingness and coins") {
  Fixture f(60, 8);
  ConstructSpec c = construct(PolicyKind::Probabilistic);
  c.replications = 3;
  const ConstructResult r = run_construct(c, f.pop, f.cfg, f.models);
  REQUIRE(r.replications.size() == 3);
  CHECK(r.episodes.size() == 180);
  double mean = 0;
  for (const auto& m : r.replications) mean += m.mean_cpuc / 3.0;
  CHECK(r.mean_cpuc == doctest::Approx(mean));
  CHECK(r.replications[0].mean_cpuc != r.replications[1].mean_cpuc);
}

TEST_CASE("the osf sweep") {
  Fixture f(60, 2);
  const ConstructSpec base = construct(PolicyKind::Mdp);
  const auto one = sweep_osf(base, {0.0}, f.pop, f.cfg, f.models);
  const ConstructResult direct = run_construct(base, f.pop, f.cfg, f.models);
  REQUIRE(one.size() == 1);
  CHECK(one[0].second.mean_cpuc == direct.mean_cpuc);
  CHECK(one[0].second.mean_final_delta == direct.mean_final_delta);

  const std::vector<double> grid{0, 1, 2, 3, 4, 5, 6, 10};
  const auto all = sweep_osf(base, grid, f.pop, f.cfg, f.models);
  REQUIRE(all.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(all[i].first == grid[i]);

  CHECK_THROWS_AS(sweep_osf(construct(PolicyKind::HardStop), grid, f.pop, f.cfg, f.models), Error);
  CHECK_THROWS_AS(sweep_osf(base, {}, f.pop, f.cfg, f.models), Error);
}

TEST_CASE("construct validation") {
  Fixture f(10);
  CHECK_THROWS_AS(run_construct(construct(PolicyKind::Mdp, ModelClass::FirstOrderLocal), f.pop, f.cfg, f.models),
                  Error);
  ConstructSpec bad = construct(PolicyKind::RawEffect);
  bad.replications = 0;
  CHECK_THROWS_AS(run_construct(bad, f.pop, f.cfg, f.models), Error);
  CHECK_THROWS_AS(run_construct(construct(PolicyKind::RawEffect), {}, f.cfg, f.models), Error);
}

TEST_CASE("results csv layout") {
  Fixture f(10);
  const ConstructSpec c = construct(PolicyKind::HardStop);
  std::ostringstream out;
  write_results_csv(out, {{c, run_construct(c, f.pop, f.cfg, f.models)}});
  const std::string text = out.str();
  CHECK(text.rfind("construct,decision_model,transition_model,missing_obs,osf,cpuc,avg_final_delta,"
                   "std_final_delta,avg_services,pct_max_dosage\n",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
