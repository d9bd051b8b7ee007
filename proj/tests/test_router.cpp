#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ridemp/router.hpp"

using namespace ridemp;

namespace {

TravelMatrix grid_travel(int zones, int columns, double spacing = 240.0) {
  ScenarioConfig c;
  c.zone_count = zones;
  c.grid_columns = columns;
  c.zone_spacing_seconds = spacing;
  return build_travel_matrix(c);
}

std::vector<RouterRequest> random_requests(Rng& rng, int zones, int n, double now) {
  std::vector<RouterRequest> reqs;
  for (int k = 0; k < n; ++k) {
    RouterRequest r;
    r.id = k;
    r.origin = static_cast<int>(rng.uniform_int(0, zones - 1));
    r.dest = static_cast<int>(rng.uniform_int(0, zones - 1));
    r.time_s = now - rng.uniform(0.0, 300.0);
    r.riders = static_cast<int>(rng.uniform_int(1, 3));
    r.penalty = rng.uniform(100.0, 2000.0);
    reqs.push_back(r);
  }
  return reqs;
}

// Recomputes a route's timeline from scratch and checks every constraint.
void expect_route_feasible(const Route& rt, const std::vector<RouterRequest>& reqs, const TravelMatrix& travel,
                           const RouterOptions& o) {
  auto tt = [&](int a, int b) { return a == b ? o.intra_zone_seconds : travel.eta(a, b); };
  ASSERT_GE(rt.requests.size(), 1u);
  ASSERT_LE(static_cast<int>(rt.requests.size()), o.max_pickups);
  int riders = 0;
  int at = rt.zone;
  double clock = o.now;
  double waits = 0.0;
  for (std::size_t q = 0; q < rt.requests.size(); ++q) {
    const auto& r = reqs[rt.requests[q]];
    riders += r.riders;
    if (o.pickup_radius_seconds > 0) EXPECT_LE(tt(at, r.origin), o.pickup_radius_seconds + 1e-9);
    clock += tt(at, r.origin);
    EXPECT_NEAR(rt.pickup_at[q], clock, 1e-9);
    EXPECT_LE(clock, r.time_s + o.pickup_deadline_seconds + 1e-9);
    waits += clock - r.time_s;
    at = r.origin;
  }
  EXPECT_LE(riders, o.capacity);
  EXPECT_NEAR(rt.cost, waits, 1e-9);
  for (std::size_t q = 0; q < rt.requests.size(); ++q) {
    const auto& r = reqs[rt.requests[q]];
    EXPECT_LE(rt.dropoff_at[q] - rt.pickup_at[q], o.detour_factor * tt(r.origin, r.dest) + 1e-9);
  }
}

}  // namespace

TEST(Router, SameZoneWaitIsIntraZoneTime) {
  const auto travel = grid_travel(2, 2);
  RouterOptions o;
  o.now = 600.0;
  const std::vector<RouterRequest> reqs{{1, 0, 1, 600.0, 1, 1000.0}};
  const auto res = solve_routing({{1, 0}}, reqs, travel, o);
  ASSERT_EQ(res.selected.size(), 1u);
  EXPECT_DOUBLE_EQ(res.selected[0].cost, o.intra_zone_seconds);
  EXPECT_TRUE(res.unserved.empty());
}

TEST(Router, ZeroVehiclesLeavesAllUnserved) {
  const auto travel = grid_travel(3, 3);
  RouterOptions o;
  Rng rng(1);
  const auto reqs = random_requests(rng, 3, 5, 0.0);
  const auto res = solve_routing({{0, 0, 0}}, reqs, travel, o);
  EXPECT_TRUE(res.selected.empty());
  EXPECT_EQ(res.unserved.size(), 5u);
  double pen = 0.0;
  for (const auto& r : reqs) pen += r.penalty;
  EXPECT_NEAR(res.objective, pen, 1e-9);
}

TEST(Router, SharedRideChosenWhenCheaper) {
  // One vehicle, two riders going the same way from the same zone.
  const auto travel = grid_travel(2, 2);
  RouterOptions o;
  const std::vector<RouterRequest> reqs{{1, 0, 1, 0.0, 1, 5000.0}, {2, 0, 1, 0.0, 1, 5000.0}};
  const auto res = solve_routing({{1, 0}}, reqs, travel, o);
  ASSERT_EQ(res.selected.size(), 1u);
  EXPECT_EQ(res.selected[0].requests.size(), 2u);
  EXPECT_NEAR(res.objective, oracle::exhaustive_routing({{1, 0}}, reqs, enumerate_routes({{1, 0}}, reqs, travel, o)),
              1e-9);
}

TEST(Router, CapacityBlocksSharing) {
  const auto travel = grid_travel(2, 2);
  RouterOptions o;
  o.capacity = 3;
  const std::vector<RouterRequest> reqs{{1, 0, 1, 0.0, 2, 5000.0}, {2, 0, 1, 0.0, 2, 5000.0}};
  for (const auto& rt : enumerate_routes({{1, 0}}, reqs, travel, o)) EXPECT_EQ(rt.requests.size(), 1u);
}

TEST(Router, RadiusFiltersFarPickups) {
  const auto travel = grid_travel(3, 3, 240.0);
  RouterOptions o;
  o.pickup_radius_seconds = 250.0;
  const std::vector<RouterRequest> reqs{{1, 2, 0, 0.0, 1, 5000.0}};
  // Zone 0 is two spacings from zone 2, zone 1 is one.
  EXPECT_TRUE(enumerate_routes({{1, 0, 0}}, reqs, travel, o).empty());
  EXPECT_EQ(enumerate_routes({{0, 1, 0}}, reqs, travel, o).size(), 1u);
  o.pickup_radius_seconds = 0.0;
  EXPECT_EQ(enumerate_routes({{1, 0, 0}}, reqs, travel, o).size(), 1u);
}

TEST(Router, EnumeratedRoutesAreFeasible) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int zones = static_cast<int>(rng.uniform_int(1, 6));
    const auto travel = grid_travel(zones, 3, rng.uniform(120.0, 420.0));
    RouterOptions o;
    o.now = 900.0;
    o.pickup_radius_seconds = rng.bernoulli(0.5) ? 0.0 : rng.uniform(100.0, 600.0);
    o.capacity = static_cast<int>(rng.uniform_int(2, 4));
    RouterFleet fleet{std::vector<int>(zones)};
    for (auto& v : fleet.idle) v = static_cast<int>(rng.uniform_int(0, 2));
    const auto reqs = random_requests(rng, zones, static_cast<int>(rng.uniform_int(0, 6)), o.now);
    for (const auto& rt : enumerate_routes(fleet, reqs, travel, o)) {
      EXPECT_GT(fleet.idle[rt.zone], 0);
      expect_route_feasible(rt, reqs, travel, o);
    }
  }
}

TEST(Router, MatchesExhaustiveRouteSetOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int zones = static_cast<int>(rng.uniform_int(1, 4));
    const auto travel = grid_travel(zones, 2, rng.uniform(120.0, 420.0));
    RouterOptions o;
    o.now = 600.0;
    o.pickup_radius_seconds = rng.bernoulli(0.5) ? 0.0 : 300.0;
    RouterFleet fleet{std::vector<int>(zones)};
    for (auto& v : fleet.idle) v = static_cast<int>(rng.uniform_int(0, 2));
    const auto reqs = random_requests(rng, zones, static_cast<int>(rng.uniform_int(0, 5)), o.now);
    const auto routes = enumerate_routes(fleet, reqs, travel, o);
    const auto res = solve_routing(fleet, reqs, travel, o);
    ASSERT_TRUE(res.optimal);
    ASSERT_NEAR(res.objective, oracle::exhaustive_routing(fleet, reqs, routes), 1e-6) << trial;
    // Selection respects vehicle counts and covers each request at most once.
    auto idle = fleet.idle;
    std::vector<int> covered(reqs.size(), 0);
    for (const auto& rt : res.selected) {
      EXPECT_GE(--idle[rt.zone], 0);
      for (int q : rt.requests) ++covered[q];
    }
    for (int q : res.unserved) ++covered[q];
    for (int c : covered) EXPECT_EQ(c, 1);
  }
}

TEST(Router, SinglePickupModeMatchesAssignment) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int zones = static_cast<int>(rng.uniform_int(1, 5));
    const auto travel = grid_travel(zones, 3);
    RouterOptions o;
    o.max_pickups = 1;
    o.now = 600.0;
    RouterFleet fleet{std::vector<int>(zones)};
    for (auto& v : fleet.idle) v = static_cast<int>(rng.uniform_int(0, 3));
    const auto reqs = random_requests(rng, zones, static_cast<int>(rng.uniform_int(0, 7)), o.now);
    const auto bb = solve_routing(fleet, reqs, travel, o);
    const auto hu = solve_single_pickup_assignment(fleet, reqs, travel, o);
    ASSERT_NEAR(bb.objective, hu.objective, 1e-6) << trial;
    EXPECT_NEAR(hu.objective, oracle::exhaustive_routing(fleet, reqs, enumerate_routes(fleet, reqs, travel, o)), 1e-6);
  }
}

TEST(Router, TwoPickupsNeverWorseThanOne) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const auto travel = grid_travel(4, 2);
    RouterOptions o;
    o.now = 600.0;
    RouterFleet fleet{std::vector<int>(4)};
    for (auto& v : fleet.idle) v = static_cast<int>(rng.uniform_int(0, 2));
    const auto reqs = random_requests(rng, 4, 6, o.now);
    EXPECT_LE(solve_routing(fleet, reqs, travel, o).objective,
              solve_single_pickup_assignment(fleet, reqs, travel, o).objective + 1e-9);
  }
}

TEST(Hungarian, SmallExamples) {
  EXPECT_TRUE(hungarian({}).empty());
  const auto col = hungarian({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
  double total = 0;
  const std::vector<std::vector<double>> c{{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  for (int i = 0; i < 3; ++i) total += c[i][col[i]];
  EXPECT_EQ(total, 5.0);
  EXPECT_THROW(hungarian({{1, 2}}), std::invalid_argument);
}
