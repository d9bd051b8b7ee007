#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ridemp/mpc.hpp"

using namespace ridemp;

TEST(Heuristic, ZeroDemandGivesZeroSolution) {
  ScenarioConfig c;
  c.zone_count = 3;
  c.horizon = 3;
  c.patience = 2;
  const MpcInstance in(c, build_travel_matrix(c), std::vector<int>(9, 2), DemandTensor(3, 3));
  const auto s = solve_heuristic(in);
  EXPECT_EQ(s.objective, 0.0);
  for (int v : s.relocate) EXPECT_EQ(v, 0);
  for (int v : s.pickup) EXPECT_EQ(v, 0);
  EXPECT_TRUE(validate_solution(in, s).empty());
}

TEST(Heuristic, AbundantSupplyKeepsAllDemandAndServesEarliest) {
  ScenarioConfig c;
  c.zone_count = 3;
  c.grid_columns = 3;
  c.horizon = 4;
  c.patience = 2;
  DemandTensor d(3, 4);
  Rng rng(3);
  for (auto& v : d.values) v = static_cast<int>(rng.uniform_int(0, 2));
  std::vector<int> idle(12, 0);
  for (int i = 0; i < 3; ++i) idle[static_cast<std::size_t>(i) * 4] = 100;
  const MpcInstance in(c, build_travel_matrix(c), idle, d);
  const auto s = solve_heuristic(in);
  ASSERT_TRUE(validate_solution(in, s).empty());
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 4; ++t) {
      if (in.baseline().origin_total(i, t) > 0) EXPECT_EQ(s.k(i, t), 0);
      for (int j = 0; j < 3; ++j) EXPECT_EQ(s.xp(i, j, t, t), d.at(i, j, t));
    }
}

TEST(Heuristic, AlwaysFeasibleAndObjectiveConsistent) {
  Rng rng(77);
  oracle::MicroSpec spec{4, 5, 4, 6};
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = oracle::random_micro_instance(rng, spec);
    const auto s = solve_heuristic(in);
    const auto report = validate_solution(in, s);
    ASSERT_TRUE(report.empty()) << trial << ": " << report.violations.front().detail;
    EXPECT_NEAR(compute_objective(in, s), s.objective, 1e-9);
    EXPECT_GE(s.objective, 0.0);
  }
}

TEST(Heuristic, CloseToExactOnMicroSuite) {
  Rng rng(1001);
  int good = 0;
  const int n = 200;
  for (int trial = 0; trial < n; ++trial) {
    const auto in = oracle::random_micro_instance(rng);
    const double exact = solve_exact(in).objective;
    const double heur = solve_heuristic(in).objective;
    EXPECT_LE(heur, exact + 1e-9);
    good += heur >= 0.95 * exact - 1e-9 ? 1 : 0;
  }
  EXPECT_GE(good, 9 * n / 10);
}

TEST(Heuristic, IsDeterministic) {
  Rng rng(5);
  oracle::MicroSpec spec{4, 4, 4, 5};
  const auto in = oracle::random_micro_instance(rng, spec);
  const auto a = solve_heuristic(in), b = solve_heuristic(in);
  EXPECT_EQ(a.to_kv().to_string(), b.to_kv().to_string());
}

TEST(ServeGreedy, ReportsShortfall) {
  ScenarioConfig c;
  c.zone_count = 1;
  c.grid_columns = 1;
  c.horizon = 1;
  c.patience = 1;
  DemandTensor d(1, 1);
  d.at(0, 0, 0) = 3;
  const MpcInstance in(c, build_travel_matrix(c), {1}, d);
  const auto keep = serve_greedy(in, {0}, std::vector<int>(1, 0));
  EXPECT_FALSE(keep.feasible);
  EXPECT_EQ(keep.shortfall[0], 2);
  const auto priced = serve_greedy(in, {in.multiplier_count() - 1}, std::vector<int>(1, 0));
  EXPECT_TRUE(priced.feasible);
}

TEST(ServeGreedy, RelocationFromShortZoneRejected) {
  ScenarioConfig c;
  c.zone_count = 2;
  c.grid_columns = 2;
  c.horizon = 2;
  c.patience = 2;
  DemandTensor d(2, 2);
  d.at(0, 0, 0) = 2;
  const MpcInstance in(c, build_travel_matrix(c), {1, 0, 0, 0}, d);
  MpcSolution reloc(in);
  reloc.xr(0, 1, 0) = 1;
  EXPECT_FALSE(serve_greedy(in, reloc.choice, reloc.relocate).feasible);
}
