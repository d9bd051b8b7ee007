#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include "oracles.hpp"
#include "ridemp/transport.hpp"

using namespace ridemp;

namespace {

void expect_margins(const TransportProblem& p, const RelocationMatrix& m) {
  for (int i = 0; i < p.zones; ++i) {
    EXPECT_EQ(m.row_sum(i), p.supply[i]);
    EXPECT_EQ(m.col_sum(i), p.demand[i]);
    for (int j = 0; j < p.zones; ++j) EXPECT_GE(m.at(i, j), 0);
  }
}

// A random plan with the given margins: fill cells in a random order greedily.
RelocationMatrix random_feasible_plan(const TransportProblem& p, Rng& rng) {
  RelocationMatrix m(p.zones);
  auto rows = p.supply;
  auto cols = p.demand;
  std::vector<int> cells(static_cast<std::size_t>(p.zones) * p.zones);
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = static_cast<int>(k);
  for (std::size_t k = cells.size(); k > 1; --k)
    std::swap(cells[k - 1], cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);
  for (int cell : cells) {
    const int i = cell / p.zones, j = cell % p.zones;
    const auto x = std::min(rows[i], cols[j]);
    m.at(i, j) += static_cast<int>(x);
    rows[i] -= x;
    cols[j] -= x;
  }
  return m;
}

}  // namespace

TEST(Transport, AllZero) {
  TransportProblem p{3, {0, 0, 0}, {0, 0, 0}, std::vector<std::int64_t>(9, 1)};
  const auto m = solve_transport(p);
  EXPECT_EQ(m.off_diagonal_total(), 0);
  for (int v : m.counts) EXPECT_EQ(v, 0);
}

TEST(Transport, ForcedOffDiagonalRoute) {
  TransportProblem p{2, {2, 0}, {0, 2}, {1000, 5, 5, 1000}};
  const auto m = solve_transport(p);
  EXPECT_EQ(m.at(0, 1), 2);
  EXPECT_EQ(transport_cost(p, m), 10);
  EXPECT_TRUE(certify_optimality(p, m));
}

TEST(Transport, SingleZoneSelfLoop) {
  TransportProblem p{1, {4}, {4}, {7}};
  const auto m = solve_transport(p);
  EXPECT_EQ(m.at(0, 0), 4);
  EXPECT_TRUE(certify_optimality(p, m));
  EXPECT_TRUE(drop_self_loops(m).empty());
}

TEST(Transport, UnbalancedRejected) {
  TransportProblem p{2, {2, 0}, {0, 1}, {9, 1, 1, 9}};
  EXPECT_THROW(solve_transport(p), std::invalid_argument);
  TransportProblem neg{2, {-1, 1}, {0, 0}, {9, 1, 1, 9}};
  EXPECT_THROW(solve_transport(neg), std::invalid_argument);
}

TEST(Transport, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = oracle::random_transport(rng, 4, 6);
    const auto m = solve_transport(p);
    expect_margins(p, m);
    ASSERT_EQ(transport_cost(p, m), oracle::brute_force_transport(p)) << "trial " << trial;
    EXPECT_TRUE(certify_optimality(p, m));
  }
}

TEST(Transport, CertificateRejectsCostlierReroute) {
  // Optimal: 0->1 and 1->0 are cheap, 0->0 and 1->1 are not; swapping a unit
  // onto the diagonal costs more and must fail the certificate.
  TransportProblem p{2, {1, 1}, {1, 1}, {50, 3, 4, 50}};
  auto m = solve_transport(p);
  ASSERT_EQ(m.at(0, 1), 1);
  ASSERT_TRUE(certify_optimality(p, m));
  m.at(0, 1) = 0;
  m.at(1, 0) = 0;
  m.at(0, 0) = 1;
  m.at(1, 1) = 1;
  EXPECT_FALSE(certify_optimality(p, m));
}

TEST(Transport, CertificateRejectsRandomCostlierPlans) {
  Rng rng(17);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::random_transport(rng, 4, 8);
    const auto best = transport_cost(p, solve_transport(p));
    for (int k = 0; k < 5; ++k) {
      const auto plan = random_feasible_plan(p, rng);
      if (transport_cost(p, plan) > best) {
        EXPECT_FALSE(certify_optimality(p, plan));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Transport, NeverWorseThanRandomFeasiblePlans) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = oracle::random_transport(rng, 8, 60);
    const auto m = solve_transport(p);
    expect_margins(p, m);
    const auto cost = transport_cost(p, m);
    for (int k = 0; k < 100; ++k) EXPECT_LE(cost, transport_cost(p, random_feasible_plan(p, rng)));
  }
}

TEST(Transport, DisaggregationProblemCosts) {
  ScenarioConfig c;
  c.zone_count = 3;
  c.grid_columns = 3;
  const auto travel = build_travel_matrix(c);
  const auto p = make_disaggregation_problem({2, 0, 1}, {0, 3, 0}, travel);
  std::int64_t max_off = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_EQ(p.c(i, j), static_cast<std::int64_t>(std::llround(travel.eta(i, j))));
        max_off = std::max(max_off, p.c(i, j));
      }
  for (int i = 0; i < 3; ++i) EXPECT_EQ(p.c(i, i), 1 + 3 * max_off);
  const auto m = drop_self_loops(solve_transport(p));
  EXPECT_EQ(m.at(0, 1), 2);
  EXPECT_EQ(m.at(2, 1), 1);
}

TEST(Transport, SelfLoopsOnlyAbsorbUnavoidableRemnants) {
  // Zone 0 both sends and receives; with BIG on the diagonal nothing stays put
  // while an off-diagonal routing exists.
  ScenarioConfig c;
  c.zone_count = 4;
  c.grid_columns = 2;
  const auto travel = build_travel_matrix(c);
  const auto p = make_disaggregation_problem({3, 1, 0, 0}, {1, 0, 2, 1}, travel);
  const auto m = solve_transport(p);
  EXPECT_EQ(m.at(0, 0), 0);
}

TEST(Transport, DeskScaleRuntime) {
  Rng rng(5);
  TransportProblem p;
  p.zones = 24;
  p.supply.assign(24, 0);
  p.demand.assign(24, 0);
  for (int u = 0; u < 200; ++u) {
    ++p.supply[rng.uniform_int(0, 23)];
    ++p.demand[rng.uniform_int(0, 23)];
  }
  ScenarioConfig c;
  c.zone_count = 24;
  c.grid_columns = 6;
  const auto travel = build_travel_matrix(c);
  std::vector<int> out(p.supply.begin(), p.supply.end()), in(p.demand.begin(), p.demand.end());
  const auto problem = make_disaggregation_problem(out, in, travel);
  const auto start = std::chrono::steady_clock::now();
  const auto m = solve_transport(problem);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  EXPECT_TRUE(certify_optimality(problem, m));
  EXPECT_LT(ms, 50.0);
}

TEST(Transport, DebugDump) {
  TransportProblem p{2, {2, 0}, {0, 2}, {1000, 5, 5, 1000}};
  std::ostringstream out;
  write_transport_debug(out, p, solve_transport(p));
  EXPECT_NE(out.str().find("cost=10"), std::string::npos);
}
