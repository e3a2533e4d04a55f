#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "treatsim/policies.hpp"
#include "treatsim/world.hpp"

namespace treatsim {

/// One experimental configuration.
struct ConstructSpec {
  std::string name;
  PolicySpec policy;
  ModelClass model_class = ModelClass::GlobalAverage;
  bool include_missing = true;
  double osf = 0.0;
  int replications = 1;

  /// Policy with the construct's model class and osf applied.
  PolicySpec effective_policy() const;
  void validate() const;
};

struct EpisodeRecord {
  int patient_id = 0;
  int replication = 0;
  double total_cost = 0.0;
  double final_delta = 0.0;
  int sessions_used = 0;
  bool max_dosage = false;
  double cpuc = 0.0;
};

struct ReplicationMetrics {
  double mean_cpuc = 0.0;
  double ratio_cpuc = 0.0;  // total cost over total delta, same penalty rule
  double mean_final_delta = 0.0;
  double std_final_delta = 0.0;  // population denominator
  double mean_services = 0.0;
  double pct_max_dosage = 0.0;
};

struct ConstructResult {
  double mean_cpuc = 0.0;
  double ratio_cpuc = 0.0;
  double mean_final_delta = 0.0;
  double std_final_delta = 0.0;
  double mean_services = 0.0;
  double pct_max_dosage = 0.0;
  std::vector<ReplicationMetrics> replications;
  std::vector<EpisodeRecord> episodes;
};

using PlannerModels = std::map<ModelClass, std::shared_ptr<const TransitionModel>>;

struct CohortOptions {
  EpisodeOptions episode;
};

ReplicationMetrics summarize(const std::vector<EpisodeRecord>& episodes, double cps);

ConstructResult run_construct(const ConstructSpec& spec, const std::vector<PatientAgent>& population,
                              const SimulationConfig& cfg, const PlannerModels& models,
                              const CohortOptions& options = {});

std::vector<std::pair<double, ConstructResult>> sweep_osf(
    const ConstructSpec& base, const std::vector<double>& osf_values,
    const std::vector<PatientAgent>& population, const SimulationConfig& cfg,
    const PlannerModels& models, const CohortOptions& options = {});

/// One row per construct: cost per unit change, final delta, services and dosage.
void write_results_csv(std::ostream& out,
                       const std::vector<std::pair<ConstructSpec, ConstructResult>>& rows);

}  // namespace treatsim
