#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ridemp/core.hpp"
#include "ridemp/demand.hpp"
#include "ridemp/mpc.hpp"
#include "ridemp/proxy.hpp"
#include "ridemp/rng.hpp"
#include "ridemp/router.hpp"
#include "ridemp/transport.hpp"

namespace ridemp {

enum class VehicleActivity { kIdle, kServing, kRelocating };

struct SimVehicle {
  int id = 0;
  int zone = 0;  // current zone, or destination while busy
  double busy_until = 0.0;
  int onboard = 0;  // riders
  VehicleActivity activity = VehicleActivity::kIdle;
};

struct OpenRequest {
  Request request;
  int epoch = 0;
  double penalty = 0.0;
};

struct PendingRelocation {
  int from = 0;
  int to = 0;
  int count = 0;
};

struct SimCounters {
  std::int64_t arrivals = 0;
  std::int64_t served = 0;  // matched to a route; pickup is then guaranteed
  std::int64_t riders_served = 0;
  std::int64_t dropped = 0;
  std::int64_t discarded = 0;
  std::int64_t relocations = 0;
  double total_wait = 0.0;
};

struct SimState {
  double clock = 0.0;
  int epoch = 0;
  std::vector<SimVehicle> vehicles;
  std::vector<OpenRequest> open;
  std::vector<double> gamma;  // pricing in force for the current epoch
  std::vector<PendingRelocation> pending;
  SimCounters counters;

  int idle_in(int zone) const;
  std::vector<int> idle_by_zone(int zones) const;
  FleetSnapshot snapshot() const;
};

// Fleet spread evenly over the zones, all idle at time 0.
SimState initial_state(const ScenarioConfig& config);

// Sets the pricing for the current epoch and re-draws retention for the open
// requests placed in it. Each request is kept with probability gamma of its
// origin zone; the draw for request id r uses substream "pricing-discard/r",
// so a request's fate does not depend on processing order.
void apply_pricing(SimState& state, const std::vector<double>& gamma, const Rng& rng);
bool retain_request(const Request& request, double gamma, const Rng& rng);

struct RelocationCheck {
  bool ok = true;
  std::vector<std::string> problems;
};
// A plan is valid when it has no self loops, no negative entries and sends at
// most first_epoch_idle[i] vehicles out of each zone i.
RelocationCheck validate_relocation(const RelocationMatrix& plan, const std::vector<int>& first_epoch_idle);

// Dispatches idle vehicles immediately; the remainder of each (i, j) order is
// queued and dispatched as vehicles become idle in i during the epoch. Throws
// std::invalid_argument carrying the validator report if the plan is invalid.
void apply_relocation(SimState& state, const RelocationMatrix& plan, const std::vector<int>& first_epoch_idle,
                      const TravelMatrix& travel, double intra_zone_seconds);

enum class PolicyKind { kNone, kRelocationOnly, kMpcHeuristic, kMpcExact, kMpcClustered, kProxy };
std::string to_string(PolicyKind policy);
PolicyKind policy_from_string(const std::string& name);

struct Metrics {
  std::string policy;
  std::uint64_t seed = 0;
  std::int64_t arrivals = 0;
  std::int64_t served = 0;
  std::int64_t riders_served = 0;
  std::int64_t dropped = 0;
  std::int64_t discarded = 0;
  std::int64_t open = 0;
  std::int64_t relocations = 0;
  double dropout_pct = 0.0;  // dropped / arrivals * 100
  double mean_wait_s = 0.0;
  std::int64_t policy_calls = 0;
  std::int64_t conservation_violations = 0;
  bool aborted = false;
  std::string diagnostic;
  // Not part of the serialized row: wall-clock figures vary between runs.
  double max_decision_seconds = 0.0;
};

inline constexpr int kMetricsSchemaVersion = 1;
std::string metrics_header();
std::string metrics_row(const Metrics& m);
Metrics parse_metrics_row(const std::string& line);

struct EpisodeOptions {
  PolicyKind policy = PolicyKind::kNone;
  std::shared_ptr<const ProxyPolicy> proxy;  // required for kProxy
  std::vector<int> merge_map;                // zone -> cluster, required for kMpcClustered
  MpcLimits exact{200'000, 0.0, true, 4000};
  HeuristicLimits heuristic{};
  std::int64_t router_node_budget = 200'000;
  int router_max_pickups = 2;
  std::ostream* trace = nullptr;              // per-epoch rows
  std::vector<MpcInstance>* record = nullptr; // every MPC instance built
};

// Runs one episode of config.episode_epochs epochs, then drains open requests.
// The demand profile supplies the expected-rate forecast the policies see.
Metrics run_episode(const ScenarioConfig& config, const DemandProfile& profile, const RequestStream& stream,
                    const EpisodeOptions& options, std::uint64_t seed);

// Instance over merged zones: idle and demand summed, travel averaged.
MpcInstance cluster_instance(const MpcInstance& instance, const std::vector<int>& merge_map);
// Maps clustered first-epoch actions back to zones: gamma applies to every
// member, relocations leave from the members with the most idle vehicles and
// arrive at the member with the most first-epoch demand.
struct ZoneActions {
  std::vector<double> gamma;
  RelocationMatrix plan;
};
ZoneActions expand_cluster_actions(const MpcInstance& instance, const std::vector<int>& merge_map,
                                   const FirstEpochActions& clustered);

}  // namespace ridemp
