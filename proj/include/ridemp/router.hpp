#pragma once

#include <cstdint>
#include <vector>

#include "ridemp/core.hpp"

namespace ridemp {

struct RouterRequest {
  std::int64_t id = 0;
  int origin = 0;
  int dest = 0;
  double time_s = 0.0;
  int riders = 1;
  double penalty = 0.0;  // cost of leaving the request unserved in this batch
};

// Idle vehicles available at the batch time. Vehicles in the same zone are
// interchangeable, so the router works with per-zone counts.
struct RouterFleet {
  std::vector<int> idle;  // per zone
};

struct RouterOptions {
  double now = 0.0;
  int max_pickups = 2;
  int capacity = 4;
  double detour_factor = 1.5;
  double intra_zone_seconds = 120.0;
  double pickup_deadline_seconds = 600.0;  // pickup no later than request time + this
  double pickup_radius_seconds = 0.0;      // longest empty leg to a pickup; 0 = unlimited
  std::int64_t node_budget = 200'000;
};

struct Route {
  int zone = 0;                    // vehicle start zone
  std::vector<int> requests;       // indices into the batch, in pickup order
  std::vector<double> pickup_at;   // per request, same order
  std::vector<double> dropoff_at;  // per request, same order
  double cost = 0.0;               // summed waiting seconds
  double finish_at = 0.0;
  int end_zone = 0;
  int riders = 0;
};

struct RouterResult {
  std::vector<Route> selected;
  std::vector<int> unserved;  // request indices
  double objective = 0.0;     // route costs + penalties of unserved requests
  bool optimal = true;
  std::int64_t nodes = 0;
};

// Travel time between zones; same-zone moves take the intra-zone time.
double zone_travel_seconds(const TravelMatrix& travel, int from, int to, double intra_zone_seconds);

// Every capacity-, detour-, radius- and deadline-feasible route with at most
// options.max_pickups pickups, for each zone holding an idle vehicle. For two
// pickups the cheapest feasible visiting order is kept.
std::vector<Route> enumerate_routes(const RouterFleet& fleet, const std::vector<RouterRequest>& requests,
                                    const TravelMatrix& travel, const RouterOptions& options);

// Minimizes sum of route costs plus penalties of unserved requests, at most
// one route per vehicle and one route per request. Depth-first branch and
// bound over requests, seeded with the single-pickup assignment.
RouterResult solve_routing(const RouterFleet& fleet, const std::vector<RouterRequest>& requests,
                           const TravelMatrix& travel, const RouterOptions& options);

// Single-pickup routing as a rectangular assignment problem (Hungarian method).
RouterResult solve_single_pickup_assignment(const RouterFleet& fleet, const std::vector<RouterRequest>& requests,
                                            const TravelMatrix& travel, const RouterOptions& options);

// Minimum-cost perfect assignment on a square cost matrix; returns column per row.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

}  // namespace ridemp
