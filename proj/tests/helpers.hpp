#pragma once

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "treatsim/belief.hpp"
#include "treatsim/planner.hpp"
#include "treatsim/transition_model.hpp"

namespace testing_support {

using namespace treatsim;

inline BinVector random_simplex(std::mt19937_64& rng, double sparsity = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution drop(sparsity);
  BinVector v{};
  double sum = 0.0;
  while (sum == 0.0) {
    for (double& x : v) sum += (x = drop(rng) ? 0.0 : e(rng));
  }
  for (double& x : v) x /= sum;
  return v;
}

// Fits a model of class `mc` to random-walk trajectories whose one-step bin
// follows a random table conditioned on the last step bin.
inline TransitionModel random_fitted_model(std::mt19937_64& rng, ModelClass mc, int patients = 40) {
  std::vector<BinVector> truth;
  for (int i = 0; i < 5; ++i) truth.push_back(random_simplex(rng, 0.3));
  const std::array<std::pair<double, double>, 5> spans{
      {{-9.0, -4.0001}, {-4.0, -1.0001}, {-1.0, 1.0}, {1.0001, 4.0}, {4.0001, 9.0}}};
  std::uniform_real_distribution<double> base(8.0, 32.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution miss(0.15);

  TrajectoryDataset data;
  for (int p = 0; p < patients; ++p) {
    Trajectory t{std::to_string(p), {}};
    double score = base(rng);
    t.sessions.push_back({0, Observation::of(OutcomeScore{score}), 0.0});
    std::size_t last = 2;
    for (int k = 1; k <= 8; ++k) {
      const double r = u(rng);
      double acc = 0.0;
      std::size_t next = 4;
      for (std::size_t n = 0; n < 5; ++n) {
        acc += truth[last][n];
        if (r < acc) {
          next = n;
          break;
        }
      }
      const double step = std::uniform_real_distribution<double>(spans[next].first, spans[next].second)(rng);
      score = std::clamp(score + step, 0.0, 40.0);
      last = static_cast<std::size_t>(oracle::bin_of(step));
      t.sessions.push_back({k, miss(rng) ? Observation::missing() : Observation::of(OutcomeScore{score}), 100.0});
    }
    data.trajectories.push_back(std::move(t));
  }
  return fit(data, mc, ScaleConfig{});
}

inline oracle::Problem to_problem(const TransitionModel& m, const ScaleConfig& cfg,
                                  const PlannerSettings& s) {
  oracle::Problem p;
  p.rows = m.rows();
  for (std::size_t n = 0; n < 5; ++n) p.effect_mean[n] = m.effects()[n].mean;
  p.global = m.model_class() == ModelClass::GlobalAverage;
  p.score_min = cfg.score_min.value;
  p.score_max = cfg.score_max.value;
  p.cps = cfg.cps;
  p.osf = s.osf * s.osf_scale;
  p.maxprob = s.mode == BackupMode::MaxProb;
  return p;
}

inline oracle::State to_state(const Belief& b, double cost) {
  return oracle::State{b.probs, b.expected_score.value, b.baseline_score.value, cost};
}

// A random root belief: intake, or a mixture with a moved score estimate.
inline Belief random_belief(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> score(0.0, 40.0);
  Belief b = Belief::at_intake(OutcomeScore{score(rng)});
  if (std::bernoulli_distribution(0.5)(rng)) {
    b.probs = random_simplex(rng, 0.3);
    b.expected_score = OutcomeScore{score(rng)};
    b.previous_score = OutcomeScore{score(rng)};
  }
  return b;
}

}  // namespace testing_support
