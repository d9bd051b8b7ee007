#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ridemp/kv_document.hpp"

namespace ridemp {

inline constexpr int kConfigSchemaVersion = 1;

// Experiment configuration. Epoch indices passed to the weight functions are
// 1-based, matching the MPC horizon convention t = 1..T.
struct ScenarioConfig {
  // Geometry.
  int zone_count = 6;
  int grid_columns = 3;
  double zone_spacing_seconds = 240.0;
  double intra_zone_seconds = 120.0;
  // Longest empty drive a vehicle accepts to reach a pickup; 0 = unlimited.
  double pickup_radius_seconds = 180.0;

  // MPC.
  int epoch_seconds = 300;
  int horizon = 4;
  int patience = 2;
  std::vector<double> multipliers{1.0, 0.75, 0.5, 0.25, 0.0};
  double rideshare = 1.5;
  double service_weight_base = 0.5;   // a in a^t * b^(rho - t)
  double service_weight_decay = 0.75; // b
  double relocation_weight_scale = 0.001;
  int big_m = 0;  // 0 selects fleet_size

  // Fleet and simulator.
  int fleet_size = 30;
  int vehicle_capacity = 4;
  int router_batch_seconds = 60;
  int episode_epochs = 24;
  int match_patience_epochs = 1;
  int pickup_patience_epochs = 2;
  double unserved_penalty_seconds = 1800.0;
  double penalty_escalation = 2.0;
  double detour_factor = 1.5;
  double demand_scale = 1.0;

  std::uint64_t rng_seed = 1;

  int multiplier_count() const { return static_cast<int>(multipliers.size()); }
  int effective_big_m() const { return big_m > 0 ? big_m : fleet_size; }

  // Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  KvDocument to_kv() const;
  // Unknown keys and a mismatched schema_version are rejected.
  static ScenarioConfig from_kv(const KvDocument& doc);
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Centroids of zones laid out row-major on a grid, in travel seconds.
std::vector<Point> grid_layout(int zone_count, int columns, double spacing_seconds);

struct TravelMatrix {
  int zones = 0;
  std::vector<double> seconds;  // eta, row-major zones x zones
  std::vector<int> epochs;      // lambda = ceil(eta / epoch), diagonal 1

  double eta(int i, int j) const { return seconds[static_cast<std::size_t>(i) * zones + j]; }
  int lambda(int i, int j) const { return epochs[static_cast<std::size_t>(i) * zones + j]; }
};

TravelMatrix build_travel_matrix(std::span<const Point> layout, int epoch_seconds);
TravelMatrix build_travel_matrix(const ScenarioConfig& config);

// Service weight a^t * b^(rho - t); throws std::out_of_range when rho is not a
// valid pickup epoch for a request placed at t.
double weight_qp(int t, int rho, const ScenarioConfig& config);
// Relocation cost c_r * a^t * eta_ij; zero on the diagonal.
double weight_qr(int i, int j, int t, const ScenarioConfig& config, const TravelMatrix& travel);

// Number of valid pickup epochs for requests placed at t (1-based).
int pickup_window_size(int t, int horizon, int patience);

// Rounds x.5 away from zero for nonnegative inputs (half-up).
std::int64_t round_half_up(double x);

}  // namespace ridemp
