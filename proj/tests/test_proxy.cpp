#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "oracles.hpp"
#include "ridemp/proxy.hpp"
#include "ridemp/sim.hpp"

using namespace ridemp;

namespace {

ScenarioConfig proxy_config(int zones, int horizon) {
  ScenarioConfig c;
  c.zone_count = zones;
  c.grid_columns = zones > 2 ? 2 : zones;
  c.horizon = horizon;
  c.patience = std::min(2, horizon);
  c.fleet_size = 40;
  return c;
}

MpcInstance random_instance(Rng& rng, int zones = 3, int horizon = 3) {
  const auto c = proxy_config(zones, horizon);
  std::vector<int> idle(static_cast<std::size_t>(zones) * horizon);
  for (auto& v : idle) v = static_cast<int>(rng.uniform_int(0, 4));
  DemandTensor d(zones, horizon);
  for (auto& v : d.values) v = static_cast<int>(rng.uniform_int(0, 2));
  return MpcInstance(c, build_travel_matrix(c), idle, d);
}

TrainingSet random_training_set(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<MpcInstance> instances;
  for (int k = 0; k < n; ++k) instances.push_back(random_instance(rng));
  return build_training_set(instances);
}

// Regression model that returns the stored row for each seen input row.
class LookupModel final : public RegressionModel {
 public:
  std::string kind() const override { return "lookup"; }
  std::vector<EpochLog> fit(const Matrix& x, const Matrix& y) override {
    for (Eigen::Index r = 0; r < x.rows(); ++r) table_[key(x.row(r))] = y.row(r);
    in_ = static_cast<int>(x.cols());
    out_ = static_cast<int>(y.cols());
    return {};
  }
  Matrix predict(const Matrix& x) const override {
    Matrix y(x.rows(), out_);
    for (Eigen::Index r = 0; r < x.rows(); ++r) y.row(r) = table_.at(key(x.row(r)));
    return y;
  }
  bool trained() const override { return out_ > 0; }
  int input_dim() const override { return in_; }
  int output_dim() const override { return out_; }
  void save(KvDocument&, const std::string&) const override {}

 private:
  static std::vector<double> key(const Eigen::RowVectorXd& row) { return {row.data(), row.data() + row.size()}; }
  std::map<std::vector<double>, Eigen::RowVectorXd> table_;
  int in_ = 0, out_ = 0;
};

std::vector<std::vector<double>> pricing_labels(const TrainingSet& set) {
  std::vector<std::vector<double>> out;
  for (const auto& ex : set.examples) out.push_back(ex.gamma);
  return out;
}

void expect_restored(const AggRelocation& r, const std::vector<int>& idle) {
  long so = 0, si = 0;
  for (std::size_t i = 0; i < idle.size(); ++i) {
    ASSERT_GE(r.out[i], 0);
    ASSERT_GE(r.in[i], 0);
    ASSERT_LE(r.out[i], std::max(0, idle[i]));
    so += r.out[i];
    si += r.in[i];
  }
  ASSERT_EQ(so, si);
}

}  // namespace

TEST(Rounding, NearestMultiplierExamples) {
  const std::vector<double> m{1.0, 0.75, 0.5, 0.25, 0.0};
  EXPECT_EQ(m[round_to_multiplier(0.8, m)], 0.75);
  EXPECT_EQ(m[round_to_multiplier(1.3, m)], 1.0);
  EXPECT_EQ(m[round_to_multiplier(0.625, m)], 0.75);
  EXPECT_EQ(m[round_to_multiplier(0.125, m)], 0.25);
  EXPECT_EQ(m[round_to_multiplier(-4.0, m)], 0.0);
  EXPECT_EQ(m[round_to_multiplier(NAN, m)], 0.0);
}

TEST(Restore, AllZeros) {
  Rng rng(1);
  const auto r = restore_feasibility({0, 0}, {0, 0}, {3, 3}, rng);
  EXPECT_EQ(r.out, (std::vector<int>{0, 0}));
  EXPECT_EQ(r.in, (std::vector<int>{0, 0}));
}

TEST(Restore, RoundingAloneBalances) {
  Rng rng(1);
  const auto r = restore_feasibility({2.4, -0.3}, {1.6, 0.2}, {5, 5}, rng);
  EXPECT_EQ(r.out, (std::vector<int>{2, 0}));
  EXPECT_EQ(r.in, (std::vector<int>{2, 0}));
}

TEST(Restore, CapThenRandomDecrementsOverSeeds) {
  std::map<std::vector<int>, int> outcomes;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto r = restore_feasibility({3, 3}, {2, 0}, {2, 3}, rng);
    expect_restored(r, {2, 3});
    EXPECT_EQ(r.in, (std::vector<int>{2, 0}));
    // Only decrements after the cap [2, 3].
    EXPECT_LE(r.out[0], 2);
    EXPECT_LE(r.out[1], 3);
    EXPECT_EQ(r.out[0] + r.out[1], 2);
    ++outcomes[r.out];
  }
  // Three unit decrements from [2, 3] can end at [0,2], [1,1] or [2,0].
  EXPECT_EQ(outcomes.size(), 3u);
}

TEST(Restore, BatchedDecrementsMatchUnitStepProcess) {
  // Reference: the literal one-unit-at-a-time process with its own stream.
  const std::vector<std::int64_t> start{40, 7, 0, 25};
  const std::int64_t excess = 50;
  const int runs = 4000;
  std::vector<double> ref(4, 0.0), got(4, 0.0);
  Rng ref_rng(123);
  for (int n = 0; n < runs; ++n) {
    auto side = start;
    for (std::int64_t e = 0; e < excess; ++e) {
      std::vector<int> nz;
      for (int i = 0; i < 4; ++i)
        if (side[i] > 0) nz.push_back(i);
      --side[nz[static_cast<std::size_t>(ref_rng.uniform_int(0, static_cast<std::int64_t>(nz.size()) - 1))]];
    }
    for (int i = 0; i < 4; ++i) ref[i] += static_cast<double>(side[i]) / runs;
  }
  for (int n = 0; n < runs; ++n) {
    Rng rng(static_cast<std::uint64_t>(n) + 99);
    const auto r = restore_feasibility({40, 7, 0, 25}, {22, 0, 0, 0}, {100, 100, 100, 100}, rng);
    for (int i = 0; i < 4; ++i) got[i] += static_cast<double>(r.out[i]) / runs;
  }
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(got[i], ref[i], 0.3) << i;
}

TEST(Restore, FuzzExtremes) {
  Rng rng(2);
  for (int trial = 0; trial < 2000; ++trial) {
    const int z = static_cast<int>(rng.uniform_int(1, 8));
    std::vector<double> o(z), in(z);
    std::vector<int> idle(z);
    for (int i = 0; i < z; ++i) {
      o[i] = rng.uniform(-1e9, 1e9);
      in[i] = rng.uniform(-1e9, 1e9);
      idle[i] = static_cast<int>(rng.uniform_int(0, 50));
    }
    const auto r = restore_feasibility(o, in, idle, rng);
    expect_restored(r, idle);
  }
}

TEST(Restore, Deterministic) {
  Rng a(5), b(5);
  const auto x = restore_feasibility({9.7, 3, 4.5}, {1, 2, 30}, {4, 9, 2}, a);
  const auto y = restore_feasibility({9.7, 3, 4.5}, {1, 2, 30}, {4, 9, 2}, b);
  EXPECT_EQ(x.out, y.out);
  EXPECT_EQ(x.in, y.in);
}

TEST(Features, ZeroInstance) {
  const auto c = proxy_config(2, 3);
  const MpcInstance in(c, build_travel_matrix(c), std::vector<int>(6, 0), DemandTensor(2, 3));
  const auto f = extract_features(in);
  const auto lay = feature_layout(in);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < lay.multipliers; ++k) EXPECT_EQ(f.zone(i)[lay.gap() + k], 0.0);
    for (int t = 0; t < 3; ++t) {
      EXPECT_EQ(f.zone(i)[lay.ratio() + t], 0.0);
      EXPECT_EQ(f.zone(i)[lay.ratio_flag() + t], 1.0);
    }
  }
  for (double v : f.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Features, FirstEpochGaps) {
  auto c = proxy_config(2, 2);
  c.multipliers = {1.0, 0.5, 0.0};
  DemandTensor d(2, 2);
  d.at(0, 0, 0) = 5;
  d.at(0, 1, 0) = 3;
  std::vector<int> idle{5, 0, 0, 0};
  const MpcInstance in(c, build_travel_matrix(c), idle, d);
  const auto f = extract_features(in);
  const auto lay = feature_layout(in);
  // gamma 0.5: round(2.5) + round(1.5) = 3 + 2 = 5 vehicles.
  EXPECT_EQ(f.zone(0)[lay.gap() + 0], -3.0);
  EXPECT_EQ(f.zone(0)[lay.gap() + 1], 0.0);
  EXPECT_EQ(f.zone(0)[lay.gap() + 2], 5.0);
}

TEST(Features, EightDemandHalfMultiplier) {
  auto c = proxy_config(1, 1);
  c.patience = 1;
  c.multipliers = {1.0, 0.5, 0.0};
  DemandTensor d(1, 1);
  d.at(0, 0, 0) = 8;
  const MpcInstance in(c, build_travel_matrix(c), {5}, d);
  const auto f = extract_features(in);
  const auto lay = feature_layout(in);
  EXPECT_EQ(f.zone(0)[lay.gap() + 0], -3.0);
  EXPECT_EQ(f.zone(0)[lay.gap() + 1], 1.0);
}

TEST(Features, LastEpochDemandOnlyChangesRatios) {
  const auto c = proxy_config(2, 3);
  DemandTensor d(2, 3);
  d.at(0, 1, 0) = 2;
  const std::vector<int> idle{3, 1, 0, 2, 0, 0};
  const MpcInstance a(c, build_travel_matrix(c), idle, d);
  d.at(0, 1, 2) = 4;
  const MpcInstance b(c, build_travel_matrix(c), idle, d);
  const auto fa = extract_features(a), fb = extract_features(b);
  const auto lay = feature_layout(a);
  ASSERT_EQ(fa.size(), fb.size());
  for (int k = 0; k < lay.multipliers; ++k) EXPECT_EQ(fa.zone(0)[lay.gap() + k], fb.zone(0)[lay.gap() + k]);
  EXPECT_NE(fa.zone(0)[lay.ratio() + 2], fb.zone(0)[lay.ratio() + 2]);
}

TEST(Features, FixedDimension) {
  Rng rng(4);
  const auto a = extract_features(random_instance(rng, 4, 3));
  const auto b = extract_features(random_instance(rng, 4, 3));
  EXPECT_EQ(a.size(), b.size());
}

TEST(TrainingSet, CardinalityAndZeroDemandLabels) {
  const auto c = proxy_config(3, 3);
  const MpcInstance zero(c, build_travel_matrix(c), std::vector<int>(9, 2), DemandTensor(3, 3));
  Rng rng(6);
  std::vector<MpcInstance> instances{zero};
  for (int k = 0; k < 11; ++k) instances.push_back(random_instance(rng));
  const auto set = build_training_set(instances);
  ASSERT_EQ(set.size(), instances.size());
  for (int v : set.examples[0].out) EXPECT_EQ(v, 0);
  for (int v : set.examples[0].in) EXPECT_EQ(v, 0);
  for (const auto& ex : set.examples) {
    EXPECT_EQ(std::accumulate(ex.out.begin(), ex.out.end(), 0), std::accumulate(ex.in.begin(), ex.in.end(), 0));
    for (std::size_t i = 0; i < ex.out.size(); ++i) EXPECT_LE(ex.out[i], ex.idle_first[i]);
  }
  const auto back = TrainingSet::from_kv(set.to_kv());
  EXPECT_EQ(back.to_kv().to_string(), set.to_kv().to_string());
}

TEST(Learner, LabelOracleHasZeroLoss) {
  const auto set = random_training_set(21, 30);
  ProxyLearner oracle_learner(ProxyTask::kPricing, LearnerLayout::kFlat, std::make_shared<LookupModel>());
  std::vector<FeatureVector> xs;
  for (const auto& ex : set.examples) xs.push_back(ex.features);
  oracle_learner.fit(xs, std::vector<std::vector<double>>(xs.size()), pricing_labels(set));
  const auto m = evaluate_learner(oracle_learner, set);
  EXPECT_EQ(m.mse, 0.0);
  EXPECT_EQ(m.zero_one, 0.0);
}

TEST(Learner, MajorityBaselineLossIsOneMinusFrequency) {
  const auto set = random_training_set(22, 40);
  std::map<int, int> counts;
  int cells = 0;
  for (const auto& ex : set.examples)
    for (int k : ex.pricing_index) {
      ++counts[k];
      ++cells;
    }
  int top = 0;
  for (const auto& [k, n] : counts) top = std::max(top, n);
  const auto m = evaluate_learner(majority_pricing_baseline(set), set);
  EXPECT_NEAR(m.zero_one, 1.0 - static_cast<double>(top) / cells, 1e-12);
}

TEST(Learner, ZeroDemandRelocationRestoresToZero) {
  const auto c = proxy_config(3, 3);
  std::vector<MpcInstance> instances;
  Rng rng(3);
  for (int k = 0; k < 40; ++k) {
    std::vector<int> idle(9);
    for (auto& v : idle) v = static_cast<int>(rng.uniform_int(0, 4));
    instances.emplace_back(c, build_travel_matrix(c), idle, DemandTensor(3, 3));
  }
  const auto set = build_training_set(instances);
  ProxyTrainOptions o;
  o.relocation_network.epochs = 30;
  const auto learner = train_relocation(set, o);
  for (const auto& ex : set.examples) {
    const auto raw = predict_relocation(learner, ex.features, ex.demand);
    ASSERT_EQ(raw.raw_out.size() + raw.raw_in.size(), 6u);
    for (double v : raw.raw_out) EXPECT_LT(std::abs(v), 0.5);
    for (double v : raw.raw_in) EXPECT_LT(std::abs(v), 0.5);
  }
}

TEST(Learner, ZoneSharedRelocationIsPermutationEquivariant) {
  const auto set = random_training_set(30, 60);
  ProxyTrainOptions o;
  o.layout = LearnerLayout::kZoneShared;
  o.relocation_network.epochs = 10;
  const auto learner = train_relocation(set, o);

  Rng rng(8);
  const auto in = random_instance(rng);
  const std::vector<int> perm{2, 0, 1};  // new zone p holds old zone perm[p]
  const int z = 3, h = in.horizon();
  TravelMatrix travel = in.travel();
  std::vector<int> idle(in.idle_table().size());
  DemandTensor d(z, h);
  for (int p = 0; p < z; ++p) {
    for (int t = 0; t < h; ++t) idle[static_cast<std::size_t>(p) * h + t] = in.idle(perm[p], t);
    for (int q = 0; q < z; ++q) {
      travel.seconds[static_cast<std::size_t>(p) * z + q] = in.travel().eta(perm[p], perm[q]);
      travel.epochs[static_cast<std::size_t>(p) * z + q] = in.travel().lambda(perm[p], perm[q]);
      for (int t = 0; t < h; ++t) d.at(p, q, t) = in.baseline().at(perm[p], perm[q], t);
    }
  }
  const MpcInstance permuted(in.config(), travel, idle, d);
  const std::vector<double> gamma{1.0, 0.5, 0.75};
  std::vector<double> gamma_p(z);
  for (int p = 0; p < z; ++p) gamma_p[p] = gamma[perm[p]];
  const auto a = predict_relocation(learner, extract_features(in), first_epoch_demand(in, gamma));
  const auto b = predict_relocation(learner, extract_features(permuted), first_epoch_demand(permuted, gamma_p));
  ASSERT_EQ(a.raw_out.size(), 3u);
  for (int p = 0; p < z; ++p) {
    EXPECT_NEAR(b.raw_out[p], a.raw_out[perm[p]], 1e-9);
    EXPECT_NEAR(b.raw_in[p], a.raw_in[perm[p]], 1e-9);
  }
}

TEST(Learner, PricingOutputChangesRelocationInput) {
  Rng rng(9);
  const auto in = random_instance(rng);
  auto d = in.baseline();
  for (int j = 0; j < 3; ++j) d.at(0, j, 0) = 3;
  const MpcInstance busy(in.config(), in.travel(), in.idle_table(), d);
  const auto keep = first_epoch_demand(busy, {1.0, 1.0, 1.0});
  const auto cut = first_epoch_demand(busy, {0.25, 1.0, 1.0});
  EXPECT_NE(keep, cut);
  ProxyLearner reloc(ProxyTask::kRelocation, LearnerLayout::kFlat, nullptr);
  const auto f = extract_features(busy);
  EXPECT_NE(reloc.design(f, keep), reloc.design(f, cut));
}

TEST(Policy, PipelinePlansPassValidatorAndAreDeterministic) {
  const auto set = random_training_set(40, 80);
  ProxyTrainOptions o;
  o.pricing_network.epochs = 10;
  o.relocation_network.epochs = 10;
  const ProxyPolicy policy(train_pricing(set, o), train_relocation(set, o), set.multipliers);
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng);
    Rng r1(static_cast<std::uint64_t>(trial)), r2(static_cast<std::uint64_t>(trial));
    const auto a = policy.decide(in, r1);
    const auto b = policy.decide(in, r2);
    EXPECT_EQ(a.plan.counts, b.plan.counts);
    EXPECT_EQ(a.pricing.index, b.pricing.index);
    std::vector<int> idle;
    for (int i = 0; i < in.zones(); ++i) idle.push_back(in.idle(i, 0));
    EXPECT_TRUE(validate_relocation(a.plan, idle).ok);
    for (double g : a.pricing.gamma)
      EXPECT_NE(std::find(set.multipliers.begin(), set.multipliers.end(), g), set.multipliers.end());
  }
}

TEST(Policy, SaveLoadRoundTrip) {
  const auto set = random_training_set(50, 30);
  for (const char* model : {"mlp", "forest"}) {
    ProxyTrainOptions o;
    o.model = model;
    o.pricing_network.epochs = 5;
    o.relocation_network.epochs = 5;
    o.forest.trees = 5;
    const ProxyPolicy policy(train_pricing(set, o), train_relocation(set, o), set.multipliers);
    const auto text = policy.to_kv().to_string();
    const auto back = ProxyPolicy::from_kv(KvDocument::parse_string(text));
    EXPECT_EQ(back.to_kv().to_string(), text) << model;
    Rng rng(1);
    const auto in = random_instance(rng);
    Rng r1(3), r2(3);
    EXPECT_EQ(policy.decide(in, r1).plan.counts, back.decide(in, r2).plan.counts);
  }
}
