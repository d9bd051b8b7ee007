#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ridemp/learner.hpp"
#include "ridemp/mpc.hpp"
#include "ridemp/rng.hpp"
#include "ridemp/transport.hpp"

namespace ridemp {

// Per-zone blocks followed by a global block. The flat learner sees the whole
// vector; the zone-shared learner sees (zone block, global block) per zone.
struct FeatureVector {
  int zones = 0;
  int zone_block = 0;
  int global_block = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  const double* zone(int i) const { return values.data() + static_cast<std::size_t>(i) * zone_block; }
  const double* global() const { return values.data() + static_cast<std::size_t>(zones) * zone_block; }
};

// Offsets inside a zone block, for tests and diagnostics.
struct FeatureLayout {
  int horizon = 0;
  int multipliers = 0;
  int idle() const { return 0; }
  int out_demand() const { return horizon; }
  int in_demand() const { return 2 * horizon; }
  int gap() const { return 3 * horizon; }  // one per multiplier
  int ratio() const { return 3 * horizon + multipliers; }
  int ratio_flag() const { return 4 * horizon + multipliers; }
  int travel() const { return 5 * horizon + multipliers; }  // mean lambda, mean eta / epoch
  int zone_block() const { return 5 * horizon + multipliers + 2; }
  int global_block() const { return 2 * horizon; }
};

FeatureLayout feature_layout(const MpcInstance& instance);
FeatureVector extract_features(const MpcInstance& instance);

// Nearest multiplier after clamping to [0, 1]; midpoints keep more demand.
int round_to_multiplier(double raw, const std::vector<double>& multipliers);

struct PricingPrediction {
  std::vector<double> raw;
  std::vector<int> index;
  std::vector<double> gamma;
};

struct AggRelocation {
  std::vector<double> raw_out;
  std::vector<double> raw_in;
  std::vector<int> out;  // restored y^o
  std::vector<int> in;   // restored y^d
};

// Round half-up and clamp at zero, cap outflow by first-epoch idle vehicles,
// then remove one unit at a time from a uniformly chosen nonzero entry of the
// larger side until both sides balance.
AggRelocation restore_feasibility(const std::vector<double>& raw_out, const std::vector<double>& raw_in,
                                  const std::vector<int>& idle_first, Rng& rng);

// Vehicle demand each zone would still send in epoch 1 under gamma:
// sum_j round_half_up(gamma_i * D0_ij1).
std::vector<double> first_epoch_demand(const MpcInstance& instance, const std::vector<double>& gamma);

enum class ProxyTask { kPricing, kRelocation };
enum class LearnerLayout { kFlat, kZoneShared };
std::string to_string(ProxyTask task);
std::string to_string(LearnerLayout layout);

// Wraps a regression model with the proxy's input and output conventions.
// Pricing outputs one gamma per zone; relocation outputs (y^o_i..., y^d_i...)
// and takes the predicted first-epoch demand as an extra per-zone input.
class ProxyLearner {
 public:
  ProxyLearner() = default;
  ProxyLearner(ProxyTask task, LearnerLayout layout, std::shared_ptr<RegressionModel> model);

  ProxyTask task() const { return task_; }
  LearnerLayout layout() const { return layout_; }
  const RegressionModel& model() const { return *model_; }
  bool trained() const { return model_ && model_->trained(); }

  // Design matrix rows for one instance (one row for flat, one per zone for zone-shared).
  Matrix design(const FeatureVector& f, const std::vector<double>& extra) const;
  Matrix targets(const std::vector<double>& labels, int zones) const;

  std::vector<EpochLog> fit(const std::vector<FeatureVector>& features, const std::vector<std::vector<double>>& extras,
                            const std::vector<std::vector<double>>& labels);
  // Length zones (pricing) or 2 * zones (relocation).
  std::vector<double> predict(const FeatureVector& f, const std::vector<double>& extra = {}) const;

  void save(KvDocument& doc, const std::string& prefix) const;
  static ProxyLearner load(const KvDocument& doc, const std::string& prefix);

 private:
  int per_zone_outputs() const { return task_ == ProxyTask::kPricing ? 1 : 2; }
  ProxyTask task_ = ProxyTask::kPricing;
  LearnerLayout layout_ = LearnerLayout::kFlat;
  std::shared_ptr<RegressionModel> model_;
};

PricingPrediction predict_pricing(const ProxyLearner& learner, const FeatureVector& features,
                                  const std::vector<double>& multipliers);
// Raw aggregated relocation; input is features plus the predicted first-epoch demand.
AggRelocation predict_relocation(const ProxyLearner& learner, const FeatureVector& features,
                                 const std::vector<double>& predicted_demand);

struct TrainingExample {
  FeatureVector features;
  std::vector<int> idle_first;      // V_i1
  std::vector<int> pricing_index;   // label multiplier per zone
  std::vector<double> gamma;        // label gamma per zone
  std::vector<double> demand;       // first-epoch demand under the label gamma
  std::vector<int> out;             // label y^o
  std::vector<int> in;              // label y^d
  double objective = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
};

struct TrainingSet {
  int zones = 0;
  std::vector<double> multipliers;
  std::vector<TrainingExample> examples;

  std::size_t size() const { return examples.size(); }
  KvDocument to_kv() const;
  static TrainingSet from_kv(const KvDocument& doc);
};

enum class SolverKind { kExact, kHeuristic };

struct LabelOptions {
  SolverKind solver = SolverKind::kHeuristic;
  MpcLimits exact{};
  HeuristicLimits heuristic{};
};

// Labels every instance with the solver's first-epoch actions.
TrainingSet build_training_set(const std::vector<MpcInstance>& instances, const LabelOptions& options = {});
TrainingExample label_instance(const MpcInstance& instance, const MpcSolution& solution);

struct LearnerMetrics {
  double mse = 0.0;
  double zero_one = -1.0;  // pricing only
  std::size_t samples = 0;
};

// Pricing: MSE on raw gamma and the fraction of (instance, zone) cells whose
// rounded multiplier differs from the label. Relocation: MSE on the raw margins
// against (y^o, y^d), with demand inputs from the label gamma.
LearnerMetrics evaluate_learner(const ProxyLearner& learner, const TrainingSet& holdout);
// Same, for the restored integer predictions (relocation only).
double restored_relocation_mse(const ProxyLearner& learner, const TrainingSet& holdout, Rng& rng);

// Baselines trained on the same set.
ProxyLearner majority_pricing_baseline(const TrainingSet& train, LearnerLayout layout = LearnerLayout::kFlat);
ProxyLearner zero_relocation_baseline(const TrainingSet& train, LearnerLayout layout = LearnerLayout::kFlat);

struct ProxyTrainOptions {
  LearnerLayout layout = LearnerLayout::kFlat;
  std::string model = "mlp";  // mlp | forest
  MlpOptions pricing_network{{64, 128}, Activation::kRelu, 1e-3, 32, 60, 0.0, 1};
  MlpOptions relocation_network{{64, 128}, Activation::kTanh, 1e-3, 32, 60, 0.0, 2};
  ForestOptions forest{};
};

ProxyLearner train_pricing(const TrainingSet& train, const ProxyTrainOptions& options);
ProxyLearner train_relocation(const TrainingSet& train, const ProxyTrainOptions& options);

struct ProxyDecision {
  PricingPrediction pricing;
  AggRelocation relocation;
  RelocationMatrix plan;  // self loops dropped
  double seconds = 0.0;   // prediction + restoration + transport
};

// Pricing, then relocation, restoration and disaggregation.
class ProxyPolicy {
 public:
  ProxyPolicy() = default;
  ProxyPolicy(ProxyLearner pricing, ProxyLearner relocation, std::vector<double> multipliers);

  ProxyDecision decide(const MpcInstance& instance, Rng& rng) const;

  const ProxyLearner& pricing() const { return pricing_; }
  const ProxyLearner& relocation() const { return relocation_; }
  const std::vector<double>& multipliers() const { return multipliers_; }

  KvDocument to_kv() const;
  static ProxyPolicy from_kv(const KvDocument& doc);
  void save(const std::string& path) const;
  static ProxyPolicy load(const std::string& path);

 private:
  ProxyLearner pricing_;
  ProxyLearner relocation_;
  std::vector<double> multipliers_;
};

}  // namespace ridemp
