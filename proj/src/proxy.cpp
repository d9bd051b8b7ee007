#include "ridemp/proxy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace ridemp {
namespace {

constexpr int kProxySchemaVersion = 1;
constexpr int kTrainingSetSchemaVersion = 1;

ProxyTask task_from_string(const std::string& s) {
  if (s == "pricing") return ProxyTask::kPricing;
  if (s == "relocation") return ProxyTask::kRelocation;
  throw FormatError("unknown proxy task '" + s + "'");
}

LearnerLayout layout_from_string(const std::string& s) {
  if (s == "flat") return LearnerLayout::kFlat;
  if (s == "zone-shared") return LearnerLayout::kZoneShared;
  throw FormatError("unknown learner layout '" + s + "'");
}

// Removes `excess` units from `side`, one unit at a time on a
// uniformly chosen nonzero entry. Runs of steps that cannot empty any entry
// are drawn together as a multinomial, which has the same distribution.
void decrement_randomly(std::vector<std::int64_t>& side, std::int64_t excess, Rng& rng) {
  while (excess > 0) {
    std::vector<std::size_t> nonzero;
    std::int64_t smallest = std::numeric_limits<std::int64_t>::max();
    for (std::size_t k = 0; k < side.size(); ++k)
      if (side[k] > 0) {
        nonzero.push_back(k);
        smallest = std::min(smallest, side[k]);
      }
    if (nonzero.empty()) throw std::logic_error("restore_feasibility: nothing left to decrement");
    const std::int64_t batch = std::min(excess, smallest);
    if (batch == 1) {
      const auto pick = nonzero[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(nonzero.size()) - 1))];
      --side[pick];
      --excess;
      continue;
    }
    std::int64_t left = batch;
    for (std::size_t r = 0; r < nonzero.size() && left > 0; ++r) {
      const std::size_t remaining = nonzero.size() - r;
      const std::int64_t take = remaining == 1 ? left : rng.binomial(left, 1.0 / static_cast<double>(remaining));
      side[nonzero[r]] -= take;
      left -= take;
    }
    excess -= batch;
  }
}

}  // namespace

std::string to_string(ProxyTask task) { return task == ProxyTask::kPricing ? "pricing" : "relocation"; }
std::string to_string(LearnerLayout layout) { return layout == LearnerLayout::kFlat ? "flat" : "zone-shared"; }

FeatureLayout feature_layout(const MpcInstance& instance) {
  return FeatureLayout{instance.horizon(), instance.multiplier_count()};
}

FeatureVector extract_features(const MpcInstance& in) {
  const int z = in.zones(), horizon = in.horizon(), kcount = in.multiplier_count();
  const FeatureLayout lay = feature_layout(in);
  FeatureVector f;
  f.zones = z;
  f.zone_block = lay.zone_block();
  f.global_block = lay.global_block();
  f.values.assign(static_cast<std::size_t>(z) * f.zone_block + f.global_block, 0.0);
  const DemandTensor& d0 = in.baseline();
  const double epoch = in.config().epoch_seconds;

  for (int i = 0; i < z; ++i) {
    double* b = f.values.data() + static_cast<std::size_t>(i) * f.zone_block;
    double cum_v = 0.0, cum_d = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const double out = d0.origin_total(i, t);
      double into = 0.0;
      for (int j = 0; j < z; ++j) into += d0.at(j, i, t);
      b[lay.idle() + t] = in.idle(i, t);
      b[lay.out_demand() + t] = out;
      b[lay.in_demand() + t] = into;
      cum_v += in.idle(i, t);
      cum_d += out;
      b[lay.ratio() + t] = cum_d > 0 ? cum_v / cum_d : cum_v;
      b[lay.ratio_flag() + t] = cum_d > 0 ? 0.0 : 1.0;
    }
    for (int k = 0; k < kcount; ++k) {
      int served = 0;
      for (int j = 0; j < z; ++j) served += in.demand(k, i, j, 0);
      b[lay.gap() + k] = in.idle(i, 0) - served;
    }
    if (z > 1) {
      double lam = 0.0, eta = 0.0;
      for (int j = 0; j < z; ++j) {
        if (j == i) continue;
        lam += in.lambda(i, j);
        eta += in.travel().eta(i, j) / epoch;
      }
      b[lay.travel()] = lam / (z - 1);
      b[lay.travel() + 1] = eta / (z - 1);
    }
  }
  double* g = f.values.data() + static_cast<std::size_t>(z) * f.zone_block;
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < z; ++i) {
      g[t] += in.idle(i, t);
      g[horizon + t] += d0.origin_total(i, t);
    }
  }
  return f;
}

int round_to_multiplier(double raw, const std::vector<double>& multipliers) {
  if (multipliers.empty()) throw std::invalid_argument("round_to_multiplier: empty multiplier set");
  const double x = std::isnan(raw) ? 0.0 : std::clamp(raw, 0.0, 1.0);
  int best = 0;
  for (int k = 1; k < static_cast<int>(multipliers.size()); ++k) {
    const double d = std::abs(multipliers[k] - x), db = std::abs(multipliers[best] - x);
    if (d < db - 1e-12 || (std::abs(d - db) <= 1e-12 && multipliers[k] > multipliers[best])) best = k;
  }
  return best;
}

AggRelocation restore_feasibility(const std::vector<double>& raw_out, const std::vector<double>& raw_in,
                                  const std::vector<int>& idle_first, Rng& rng) {
  const std::size_t z = raw_out.size();
  if (raw_in.size() != z || idle_first.size() != z) throw std::invalid_argument("restore_feasibility: size mismatch");
  AggRelocation r;
  r.raw_out = raw_out;
  r.raw_in = raw_in;
  auto round_clamp = [](double x) -> std::int64_t {
    if (!(x > 0.0)) return 0;  // negatives and NaN
    return round_half_up(std::min(x, 1e15));
  };
  std::vector<std::int64_t> out(z), in(z);
  for (std::size_t i = 0; i < z; ++i) {
    out[i] = std::min<std::int64_t>(round_clamp(raw_out[i]), std::max(0, idle_first[i]));
    in[i] = round_clamp(raw_in[i]);
  }
  std::int64_t so = 0, si = 0;
  for (std::size_t i = 0; i < z; ++i) {
    so += out[i];
    si += in[i];
  }
  if (so > si) decrement_randomly(out, so - si, rng);
  else if (si > so) decrement_randomly(in, si - so, rng);
  r.out.assign(z, 0);
  r.in.assign(z, 0);
  for (std::size_t i = 0; i < z; ++i) {
    r.out[i] = static_cast<int>(out[i]);
    r.in[i] = static_cast<int>(in[i]);
  }
  return r;
}

std::vector<double> first_epoch_demand(const MpcInstance& in, const std::vector<double>& gamma) {
  std::vector<double> out(in.zones(), 0.0);
  for (int i = 0; i < in.zones(); ++i)
    for (int j = 0; j < in.zones(); ++j)
      out[i] += static_cast<double>(round_half_up(gamma[i] * in.baseline().at(i, j, 0)));
  return out;
}

// ------------------------------------------------------------ ProxyLearner

ProxyLearner::ProxyLearner(ProxyTask task, LearnerLayout layout, std::shared_ptr<RegressionModel> model)
    : task_(task), layout_(layout), model_(std::move(model)) {}

Matrix ProxyLearner::design(const FeatureVector& f, const std::vector<double>& extra) const {
  const bool want_extra = task_ == ProxyTask::kRelocation;
  if (want_extra && extra.size() != static_cast<std::size_t>(f.zones)) {
    throw std::invalid_argument("ProxyLearner: relocation input needs one demand value per zone");
  }
  const int ex = want_extra ? 1 : 0;
  if (layout_ == LearnerLayout::kFlat) {
    Matrix x(1, static_cast<Eigen::Index>(f.size()) + ex * f.zones);
    for (std::size_t c = 0; c < f.size(); ++c) x(0, static_cast<Eigen::Index>(c)) = f.values[c];
    for (int i = 0; i < f.zones * ex; ++i) x(0, static_cast<Eigen::Index>(f.size()) + i) = extra[i];
    return x;
  }
  Matrix x(f.zones, f.zone_block + f.global_block + ex);
  for (int i = 0; i < f.zones; ++i) {
    for (int c = 0; c < f.zone_block; ++c) x(i, c) = f.zone(i)[c];
    for (int c = 0; c < f.global_block; ++c) x(i, f.zone_block + c) = f.global()[c];
    if (ex) x(i, f.zone_block + f.global_block) = extra[i];
  }
  return x;
}

Matrix ProxyLearner::targets(const std::vector<double>& labels, int zones) const {
  const int per = per_zone_outputs();
  if (labels.size() != static_cast<std::size_t>(per) * zones) throw std::invalid_argument("ProxyLearner: label size");
  if (layout_ == LearnerLayout::kFlat) {
    Matrix y(1, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t c = 0; c < labels.size(); ++c) y(0, static_cast<Eigen::Index>(c)) = labels[c];
    return y;
  }
  Matrix y(zones, per);
  for (int i = 0; i < zones; ++i)
    for (int o = 0; o < per; ++o) y(i, o) = labels[static_cast<std::size_t>(o) * zones + i];
  return y;
}

std::vector<EpochLog> ProxyLearner::fit(const std::vector<FeatureVector>& features,
                                        const std::vector<std::vector<double>>& extras,
                                        const std::vector<std::vector<double>>& labels) {
  if (!model_) throw std::logic_error("ProxyLearner::fit: no model");
  if (features.empty() || features.size() != labels.size() || features.size() != extras.size()) {
    throw std::invalid_argument("ProxyLearner::fit: empty or mismatched training data");
  }
  std::vector<Matrix> xs, ys;
  Eigen::Index rows = 0;
  for (std::size_t n = 0; n < features.size(); ++n) {
    xs.push_back(design(features[n], extras[n]));
    ys.push_back(targets(labels[n], features[n].zones));
    rows += xs.back().rows();
  }
  Matrix x(rows, xs.front().cols()), y(rows, ys.front().cols());
  Eigen::Index r = 0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    x.middleRows(r, xs[n].rows()) = xs[n];
    y.middleRows(r, ys[n].rows()) = ys[n];
    r += xs[n].rows();
  }
  return model_->fit(x, y);
}

std::vector<double> ProxyLearner::predict(const FeatureVector& f, const std::vector<double>& extra) const {
  if (!trained()) throw std::logic_error("ProxyLearner::predict: learner is not trained");
  const Matrix y = model_->predict(design(f, extra));
  const int per = per_zone_outputs();
  std::vector<double> out(static_cast<std::size_t>(per) * f.zones);
  if (layout_ == LearnerLayout::kFlat) {
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = y(0, static_cast<Eigen::Index>(c));
  } else {
    for (int i = 0; i < f.zones; ++i)
      for (int o = 0; o < per; ++o) out[static_cast<std::size_t>(o) * f.zones + i] = y(i, o);
  }
  return out;
}

void ProxyLearner::save(KvDocument& doc, const std::string& prefix) const {
  if (!model_) throw std::logic_error("ProxyLearner::save: no model");
  doc.set(prefix + ".task", to_string(task_));
  doc.set(prefix + ".layout", to_string(layout_));
  model_->save(doc, prefix + ".model");
}

ProxyLearner ProxyLearner::load(const KvDocument& doc, const std::string& prefix) {
  std::shared_ptr<RegressionModel> model = load_model(doc, prefix + ".model");
  return ProxyLearner(task_from_string(doc.get_string(prefix + ".task")),
                      layout_from_string(doc.get_string(prefix + ".layout")), std::move(model));
}

PricingPrediction predict_pricing(const ProxyLearner& learner, const FeatureVector& features,
                                  const std::vector<double>& multipliers) {
  if (learner.task() != ProxyTask::kPricing) throw std::invalid_argument("predict_pricing: not a pricing learner");
  PricingPrediction p;
  p.raw = learner.predict(features);
  for (double r : p.raw) {
    p.index.push_back(round_to_multiplier(r, multipliers));
    p.gamma.push_back(multipliers[p.index.back()]);
  }
  return p;
}

AggRelocation predict_relocation(const ProxyLearner& learner, const FeatureVector& features,
                                 const std::vector<double>& predicted_demand) {
  if (learner.task() != ProxyTask::kRelocation) {
    throw std::invalid_argument("predict_relocation: not a relocation learner");
  }
  const auto y = learner.predict(features, predicted_demand);
  AggRelocation r;
  r.raw_out.assign(y.begin(), y.begin() + features.zones);
  r.raw_in.assign(y.begin() + features.zones, y.end());
  return r;
}

// ------------------------------------------------------------ training data

TrainingExample label_instance(const MpcInstance& instance, const MpcSolution& solution) {
  TrainingExample ex;
  ex.features = extract_features(instance);
  const auto actions = first_epoch_actions(instance, solution);
  ex.pricing_index = actions.multiplier_index;
  ex.gamma = actions.gamma;
  ex.demand = first_epoch_demand(instance, ex.gamma);
  ex.out = actions.out_totals;
  ex.in = actions.in_totals;
  for (int i = 0; i < instance.zones(); ++i) ex.idle_first.push_back(instance.idle(i, 0));
  ex.objective = solution.objective;
  ex.status = solution.status;
  return ex;
}

TrainingSet build_training_set(const std::vector<MpcInstance>& instances, const LabelOptions& options) {
  TrainingSet set;
  for (const auto& inst : instances) {
    if (set.zones == 0) {
      set.zones = inst.zones();
      set.multipliers = inst.config().multipliers;
    } else if (inst.zones() != set.zones || inst.config().multipliers != set.multipliers) {
      throw std::invalid_argument("build_training_set: instances disagree on zones or multipliers");
    }
    MpcSolution sol;
    if (options.solver == SolverKind::kExact) {
      sol = solve_exact(inst, options.exact);
    } else {
      sol = solve_heuristic(inst, options.heuristic);
    }
    set.examples.push_back(label_instance(inst, sol));
  }
  return set;
}

KvDocument TrainingSet::to_kv() const {
  KvDocument doc;
  doc.set("schema_version", kTrainingSetSchemaVersion);
  doc.set("kind", "training-set");
  doc.set("zones", zones);
  doc.set("multipliers", multipliers);
  doc.set("examples", static_cast<int>(examples.size()));
  if (!examples.empty()) {
    doc.set("zone_block", examples.front().features.zone_block);
    doc.set("global_block", examples.front().features.global_block);
  }
  for (std::size_t n = 0; n < examples.size(); ++n) {
    const auto& ex = examples[n];
    const std::string p = "example." + std::to_string(n);
    doc.set(p + ".features", ex.features.values);
    doc.set(p + ".idle_first", ex.idle_first);
    doc.set(p + ".pricing_index", ex.pricing_index);
    doc.set(p + ".gamma", ex.gamma);
    doc.set(p + ".demand", ex.demand);
    doc.set(p + ".out", ex.out);
    doc.set(p + ".in", ex.in);
    doc.set(p + ".objective", ex.objective);
    doc.set(p + ".status", to_string(ex.status));
  }
  return doc;
}

TrainingSet TrainingSet::from_kv(const KvDocument& doc) {
  if (doc.get_int("schema_version") != kTrainingSetSchemaVersion || doc.get_string("kind") != "training-set") {
    throw FormatError("not a training set or unsupported schema_version");
  }
  TrainingSet set;
  set.zones = static_cast<int>(doc.get_int("zones"));
  set.multipliers = doc.get_doubles("multipliers");
  const auto n = doc.get_int("examples");
  const int zone_block = static_cast<int>(doc.get_int_or("zone_block", 0));
  const int global_block = static_cast<int>(doc.get_int_or("global_block", 0));
  for (std::int64_t e = 0; e < n; ++e) {
    const std::string p = "example." + std::to_string(e);
    TrainingExample ex;
    ex.features.zones = set.zones;
    ex.features.zone_block = zone_block;
    ex.features.global_block = global_block;
    ex.features.values = doc.get_doubles(p + ".features");
    if (ex.features.values.size() != static_cast<std::size_t>(set.zones) * zone_block + global_block) {
      throw FormatError(p + ": feature length mismatch");
    }
    ex.idle_first = doc.get_ints(p + ".idle_first");
    ex.pricing_index = doc.get_ints(p + ".pricing_index");
    ex.gamma = doc.get_doubles(p + ".gamma");
    ex.demand = doc.get_doubles(p + ".demand");
    ex.out = doc.get_ints(p + ".out");
    ex.in = doc.get_ints(p + ".in");
    ex.objective = doc.get_double(p + ".objective");
    const auto& st = doc.get_string(p + ".status");
    ex.status = st == "optimal" ? SolveStatus::kOptimal
                : st == "budget-feasible" ? SolveStatus::kBudgetFeasible
                                          : SolveStatus::kInfeasibleReported;
    set.examples.push_back(std::move(ex));
  }
  return set;
}

// ------------------------------------------------------------ training

namespace {

std::vector<double> relocation_labels(const TrainingExample& ex) {
  std::vector<double> y(ex.out.begin(), ex.out.end());
  y.insert(y.end(), ex.in.begin(), ex.in.end());
  return y;
}

struct Columns {
  std::vector<FeatureVector> features;
  std::vector<std::vector<double>> extras;
  std::vector<std::vector<double>> labels;
};

Columns columns(const TrainingSet& set, ProxyTask task) {
  Columns c;
  for (const auto& ex : set.examples) {
    c.features.push_back(ex.features);
    if (task == ProxyTask::kPricing) {
      c.extras.emplace_back();
      c.labels.push_back(ex.gamma);
    } else {
      c.extras.push_back(ex.demand);
      c.labels.push_back(relocation_labels(ex));
    }
  }
  return c;
}

int input_width(const TrainingSet& set, ProxyTask task, LearnerLayout layout) {
  const auto& f = set.examples.front().features;
  const int ex = task == ProxyTask::kRelocation ? 1 : 0;
  if (layout == LearnerLayout::kFlat) return static_cast<int>(f.size()) + ex * f.zones;
  return f.zone_block + f.global_block + ex;
}

int output_width(const TrainingSet& set, ProxyTask task, LearnerLayout layout) {
  const int per = task == ProxyTask::kPricing ? 1 : 2;
  return layout == LearnerLayout::kFlat ? per * set.zones : per;
}

ProxyLearner train(const TrainingSet& set, ProxyTask task, const ProxyTrainOptions& options) {
  if (set.examples.empty()) throw std::invalid_argument("train: empty training set");
  const int in = input_width(set, task, options.layout), out = output_width(set, task, options.layout);
  std::shared_ptr<RegressionModel> model;
  if (options.model == "mlp") {
    model = std::make_shared<Mlp>(in, out,
                                  task == ProxyTask::kPricing ? options.pricing_network : options.relocation_network);
  } else if (options.model == "forest") {
    model = std::make_shared<RandomForest>(options.forest);
  } else {
    throw std::invalid_argument("train: unknown model '" + options.model + "'");
  }
  ProxyLearner learner(task, options.layout, model);
  const auto c = columns(set, task);
  learner.fit(c.features, c.extras, c.labels);
  return learner;
}

}  // namespace

ProxyLearner train_pricing(const TrainingSet& train_set, const ProxyTrainOptions& options) {
  return train(train_set, ProxyTask::kPricing, options);
}

ProxyLearner train_relocation(const TrainingSet& train_set, const ProxyTrainOptions& options) {
  return train(train_set, ProxyTask::kRelocation, options);
}

ProxyLearner majority_pricing_baseline(const TrainingSet& set, LearnerLayout layout) {
  if (set.examples.empty()) throw std::invalid_argument("majority_pricing_baseline: empty training set");
  std::map<int, std::size_t> counts;
  for (const auto& ex : set.examples)
    for (int k : ex.pricing_index) ++counts[k];
  int best = counts.begin()->first;
  for (const auto& [k, n] : counts)
    if (n > counts[best]) best = k;
  const int out = output_width(set, ProxyTask::kPricing, layout);
  auto model = std::make_shared<ConstantModel>(input_width(set, ProxyTask::kPricing, layout),
                                               Vector::Constant(out, set.multipliers[best]));
  return ProxyLearner(ProxyTask::kPricing, layout, model);
}

ProxyLearner zero_relocation_baseline(const TrainingSet& set, LearnerLayout layout) {
  if (set.examples.empty()) throw std::invalid_argument("zero_relocation_baseline: empty training set");
  const int out = output_width(set, ProxyTask::kRelocation, layout);
  auto model = std::make_shared<ConstantModel>(input_width(set, ProxyTask::kRelocation, layout), Vector::Zero(out));
  return ProxyLearner(ProxyTask::kRelocation, layout, model);
}

LearnerMetrics evaluate_learner(const ProxyLearner& learner, const TrainingSet& holdout) {
  if (holdout.examples.empty()) throw std::invalid_argument("evaluate_learner: empty holdout");
  LearnerMetrics m;
  double sq = 0.0;
  std::size_t cells = 0, wrong = 0;
  for (const auto& ex : holdout.examples) {
    if (learner.task() == ProxyTask::kPricing) {
      const auto p = predict_pricing(learner, ex.features, holdout.multipliers);
      for (std::size_t i = 0; i < p.raw.size(); ++i) {
        sq += (p.raw[i] - ex.gamma[i]) * (p.raw[i] - ex.gamma[i]);
        wrong += p.index[i] != ex.pricing_index[i] ? 1 : 0;
        ++cells;
      }
    } else {
      const auto y = learner.predict(ex.features, ex.demand);
      const auto label = relocation_labels(ex);
      for (std::size_t c = 0; c < y.size(); ++c) {
        sq += (y[c] - label[c]) * (y[c] - label[c]);
        ++cells;
      }
    }
  }
  m.samples = holdout.examples.size();
  m.mse = sq / static_cast<double>(cells);
  if (learner.task() == ProxyTask::kPricing) m.zero_one = static_cast<double>(wrong) / static_cast<double>(cells);
  return m;
}

double restored_relocation_mse(const ProxyLearner& learner, const TrainingSet& holdout, Rng& rng) {
  if (holdout.examples.empty()) throw std::invalid_argument("restored_relocation_mse: empty holdout");
  double sq = 0.0;
  std::size_t cells = 0;
  for (const auto& ex : holdout.examples) {
    const auto raw = predict_relocation(learner, ex.features, ex.demand);
    const auto r = restore_feasibility(raw.raw_out, raw.raw_in, ex.idle_first, rng);
    for (std::size_t i = 0; i < r.out.size(); ++i) {
      sq += std::pow(r.out[i] - ex.out[i], 2) + std::pow(r.in[i] - ex.in[i], 2);
      cells += 2;
    }
  }
  return sq / static_cast<double>(cells);
}

// ------------------------------------------------------------ ProxyPolicy

ProxyPolicy::ProxyPolicy(ProxyLearner pricing, ProxyLearner relocation, std::vector<double> multipliers)
    : pricing_(std::move(pricing)), relocation_(std::move(relocation)), multipliers_(std::move(multipliers)) {
  if (pricing_.task() != ProxyTask::kPricing || relocation_.task() != ProxyTask::kRelocation) {
    throw std::invalid_argument("ProxyPolicy: learner tasks out of order");
  }
}

ProxyDecision ProxyPolicy::decide(const MpcInstance& instance, Rng& rng) const {
  const auto start = std::chrono::steady_clock::now();
  ProxyDecision d;
  const auto features = extract_features(instance);
  d.pricing = predict_pricing(pricing_, features, multipliers_);
  const auto demand = first_epoch_demand(instance, d.pricing.gamma);
  const auto raw = predict_relocation(relocation_, features, demand);
  std::vector<int> idle_first(instance.zones());
  for (int i = 0; i < instance.zones(); ++i) idle_first[i] = instance.idle(i, 0);
  d.relocation = restore_feasibility(raw.raw_out, raw.raw_in, idle_first, rng);
  const auto problem = make_disaggregation_problem(d.relocation.out, d.relocation.in, instance.travel());
  d.plan = drop_self_loops(solve_transport(problem));
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  d.seconds = dt.count();
  return d;
}

KvDocument ProxyPolicy::to_kv() const {
  KvDocument doc;
  doc.set("schema_version", kProxySchemaVersion);
  doc.set("kind", "proxy-policy");
  doc.set("multipliers", multipliers_);
  pricing_.save(doc, "pricing");
  relocation_.save(doc, "relocation");
  return doc;
}

ProxyPolicy ProxyPolicy::from_kv(const KvDocument& doc) {
  if (doc.get_int("schema_version") != kProxySchemaVersion || doc.get_string("kind") != "proxy-policy") {
    throw FormatError("not a proxy checkpoint or unsupported schema_version");
  }
  return ProxyPolicy(ProxyLearner::load(doc, "pricing"), ProxyLearner::load(doc, "relocation"),
                     doc.get_doubles("multipliers"));
}

void ProxyPolicy::save(const std::string& path) const { to_kv().save(path); }

ProxyPolicy ProxyPolicy::load(const std::string& path) { return from_kv(KvDocument::load(path)); }

}  // namespace ridemp
