#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ridemp/core.hpp"
#include "ridemp/demand.hpp"
#include "ridemp/proxy.hpp"
#include "ridemp/sim.hpp"

namespace ridemp {

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;
  std::vector<std::uint64_t> seeds() const;
};
SeedRange parse_seed_range(const std::string& text);  // "a-b", "a b" or "a"

struct ScenarioSpec {
  std::string name;
  std::string pattern = "uniform";
  ProfileParams params;
};

inline constexpr int kPlanSchemaVersion = 1;

struct ExperimentPlan {
  std::string output_dir = "run";
  ScenarioConfig config;
  std::vector<ScenarioSpec> scenarios;
  SeedRange train_seeds{1, 8};
  SeedRange eval_seeds{101, 120};
  int perturbations = 5;
  PolicyKind harvest_policy = PolicyKind::kMpcHeuristic;
  std::vector<PolicyKind> policies{PolicyKind::kProxy, PolicyKind::kMpcHeuristic, PolicyKind::kRelocationOnly};
  std::vector<int> merge_map;
  LabelOptions label;
  ProxyTrainOptions train;
  double holdout_fraction = 0.2;
  std::uint64_t split_seed = 7;
  EpisodeOptions episode;  // budgets only; policy and artifacts are filled per run
  bool write_traces = false;

  // Unknown keys are rejected with PlanError.
  static ExperimentPlan from_kv(const KvDocument& doc);
  static ExperimentPlan load(const std::string& path);
  KvDocument to_kv() const;
};

struct StageFlags {
  bool force = false;
  bool export_mip = false;
  int jobs = 1;
  bool wall_clock = false;  // solver budgets in seconds instead of nodes only
  std::optional<SeedRange> seed_override;
};

DemandProfile scenario_profile(const ScenarioConfig& config, const ScenarioSpec& spec);
RequestStream scenario_stream(const ScenarioConfig& config, const DemandProfile& profile, std::uint64_t seed);
// Perturbation percentage for variant v (1-based) of a base seed, drawn from U(-5, 5).
double perturbation_percentage(std::uint64_t seed, int variant);

// MPC instances seen by `policy` over one episode.
std::vector<MpcInstance> harvest_instances(const ScenarioConfig& config, const DemandProfile& profile,
                                           const RequestStream& stream, PolicyKind policy, std::uint64_t seed,
                                           const EpisodeOptions& base = {});

struct TrainHoldout {
  TrainingSet train;
  TrainingSet holdout;
};
TrainHoldout split_training_set(const TrainingSet& set, double holdout_fraction, std::uint64_t seed);

struct SummaryRow {
  std::string scenario;
  std::string policy;
  std::string metric;
  int n = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
struct EvaluationRow {
  std::string scenario;
  Metrics metrics;
};
// Mean and 95% Student-t interval per (scenario, policy, panel metric).
std::vector<SummaryRow> summarize(const std::vector<EvaluationRow>& rows);
double student_t_975(int dof);

// Runs fn(0..n-1) on up to `jobs` threads; results are written by index, so
// output order does not depend on scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// Stage entry points. Each writes under plan.output_dir and logs progress to `log`.
void cmd_generate(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log);
void cmd_solve(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log);
void cmd_train(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log);
void cmd_evaluate(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log);
void cmd_report(const ExperimentPlan& plan, const StageFlags& flags, std::ostream& log);

std::vector<EvaluationRow> read_evaluation(const std::string& path);
std::string version_stamp();

}  // namespace ridemp
