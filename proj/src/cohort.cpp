#include "treatsim/cohort.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "treatsim/error.hpp"

namespace treatsim {

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string_view transition_label(const ConstructSpec& spec) {
  switch (spec.policy.kind) {
    case PolicyKind::HardStop: return "N/A";
    case PolicyKind::RawEffect: return "ZerothOrder";
    default: return to_string(spec.model_class);
  }
}

}  // namespace

PolicySpec ConstructSpec::effective_policy() const {
  PolicySpec p = policy;
  p.model_class = model_class;
  p.osf = osf;
  return p;
}

void ConstructSpec::validate() const {
  if (replications < 1) {
    throw Error(ErrorKind::Config, fmt::format("construct '{}': replications must be >= 1", name));
  }
  try {
    effective_policy().validate();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("construct '{}': {}", name, e.what()));
  }
}

ReplicationMetrics summarize(const std::vector<EpisodeRecord>& episodes, double cps) {
  ReplicationMetrics m;
  if (episodes.empty()) return m;
  const auto n = static_cast<double>(episodes.size());
  double cost = 0.0, delta = 0.0, cpuc_sum = 0.0, services = 0.0, max_dosage = 0.0;
  for (const EpisodeRecord& e : episodes) {
    cost += e.total_cost;
    delta += e.final_delta;
    cpuc_sum += e.cpuc;
    services += e.sessions_used;
    max_dosage += e.max_dosage ? 1.0 : 0.0;
  }
  m.mean_cpuc = cpuc_sum / n;
  m.mean_final_delta = delta / n;
  m.ratio_cpuc = cpuc(cost / n, m.mean_final_delta, cps);
  m.mean_services = services / n;
  m.pct_max_dosage = 100.0 * max_dosage / n;
  double ss = 0.0;
  for (const EpisodeRecord& e : episodes) {
    const double d = e.final_delta - m.mean_final_delta;
    ss += d * d;
  }
  m.std_final_delta = std::sqrt(ss / n);
  return m;
}

ConstructResult run_construct(const ConstructSpec& spec, const std::vector<PatientAgent>& population,
                              const SimulationConfig& cfg, const PlannerModels& models,
                              const CohortOptions& options) {
  spec.validate();
  if (population.empty()) throw Error(ErrorKind::Config, "population is empty");
  const PolicySpec policy = spec.effective_policy();

  const TransitionModel* model = nullptr;
  if (policy.needs_model()) {
    const auto it = models.find(spec.model_class);
    if (it == models.end() || !it->second) {
      throw Error(ErrorKind::Config, fmt::format("construct '{}': no {} model available", spec.name,
                                                 to_string(spec.model_class)));
    }
    model = it->second.get();
  }

  SimulationConfig run_cfg = cfg;
  if (!spec.include_missing) run_cfg.p_missing = 0.0;

  ConstructResult result;
  result.episodes.reserve(population.size() * static_cast<std::size_t>(spec.replications));
  for (int rep = 0; rep < spec.replications; ++rep) {
    std::vector<EpisodeRecord> records;
    records.reserve(population.size());
    for (const PatientAgent& patient : population) {
      PatientAgent agent = patient;
      agent.replication = rep;
      const EpisodeState ep = run_episode(agent, policy, model, run_cfg, options.episode);
      const EpisodeOutcome& o = ep.outcome;
      records.push_back(EpisodeRecord{agent.patient_id, rep, o.total_cost, o.final_delta,
                                      o.sessions_used, o.max_dosage,
                                      cpuc(o.total_cost, o.final_delta, cfg.scale.cps)});
    }
    result.replications.push_back(summarize(records, cfg.scale.cps));
    result.episodes.insert(result.episodes.end(), records.begin(), records.end());
  }

  const auto reps = static_cast<double>(result.replications.size());
  for (const ReplicationMetrics& r : result.replications) {
    result.mean_cpuc += r.mean_cpuc / reps;
    result.ratio_cpuc += r.ratio_cpuc / reps;
    result.mean_final_delta += r.mean_final_delta / reps;
    result.std_final_delta += r.std_final_delta / reps;
    result.mean_services += r.mean_services / reps;
    result.pct_max_dosage += r.pct_max_dosage / reps;
  }
  return result;
}

std::vector<std::pair<double, ConstructResult>> sweep_osf(
    const ConstructSpec& base, const std::vector<double>& osf_values,
    const std::vector<PatientAgent>& population, const SimulationConfig& cfg,
    const PlannerModels& models, const CohortOptions& options) {
  if (base.policy.kind != PolicyKind::Mdp) {
    throw Error(ErrorKind::Config,
                fmt::format("construct '{}': the outcome scaling factor only affects MDP policies",
                            base.name));
  }
  if (osf_values.empty()) throw Error(ErrorKind::Config, "osf sweep needs at least one value");
  std::vector<std::pair<double, ConstructResult>> out;
  out.reserve(osf_values.size());
  for (double osf : osf_values) {
    ConstructSpec spec = base;
    spec.osf = osf;
    out.emplace_back(osf, run_construct(spec, population, cfg, models, options));
  }
  return out;
}

void write_results_csv(std::ostream& out,
                       const std::vector<std::pair<ConstructSpec, ConstructResult>>& rows) {
  out << "construct,decision_model,transition_model,missing_obs,osf,cpuc,avg_final_delta,"
         "std_final_delta,avg_services,pct_max_dosage\n";
  for (const auto& [spec, r] : rows) {
    std::string decision(to_string(spec.policy.kind));
    if (spec.policy.kind == PolicyKind::Mdp) decision += fmt::format("-{}", to_string(spec.policy.mode));
    fmt::print(out, "{},{},{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.2f}\n", csv_field(spec.name),
               decision, transition_label(spec), spec.include_missing ? "Yes" : "No", spec.osf,
               r.mean_cpuc, r.mean_final_delta, r.std_final_delta, r.mean_services,
               r.pct_max_dosage);
  }
}

}  // namespace treatsim
