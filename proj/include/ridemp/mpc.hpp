#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ridemp/core.hpp"
#include "ridemp/demand.hpp"
#include "ridemp/transport.hpp"

namespace ridemp {

// Epoch indices inside the MPC module are 0-based (t = 0 .. T-1); weights are
// evaluated at t + 1.

struct VehicleStatus {
  int zone = 0;              // current zone, or destination while busy
  double available_at = 0.0; // seconds; <= now means idle
};

struct FleetSnapshot {
  double now = 0.0;  // start of the MPC's first epoch
  std::vector<VehicleStatus> vehicles;
};

class MpcInstance {
 public:
  MpcInstance() = default;
  // idle: zones x horizon, row-major by zone.
  MpcInstance(ScenarioConfig config, TravelMatrix travel, std::vector<int> idle, DemandTensor baseline);

  const ScenarioConfig& config() const { return config_; }
  const TravelMatrix& travel() const { return travel_; }
  const DemandTensor& baseline() const { return baseline_; }
  int zones() const { return zones_; }
  int horizon() const { return horizon_; }
  int patience() const { return patience_; }
  int multiplier_count() const { return static_cast<int>(config_.multipliers.size()); }
  double multiplier(int k) const { return config_.multipliers[k]; }
  int lambda(int i, int j) const { return travel_.lambda(i, j); }

  int idle(int i, int t) const { return idle_[static_cast<std::size_t>(i) * horizon_ + t]; }
  const std::vector<int>& idle_table() const { return idle_; }
  // D^k_ijt = round_half_up(gamma^k * D0_ijt).
  int demand(int k, int i, int j, int t) const {
    return options_[((static_cast<std::size_t>(k) * zones_ + i) * zones_ + j) * horizon_ + t];
  }
  int total_idle() const;

  // Requests placed at t must be fully served when t <= T - s (0-based).
  bool mandatory(int t) const { return t <= horizon_ - patience_; }
  // Last valid pickup epoch for requests placed at t.
  int last_pickup(int t) const { return std::min(horizon_ - 1, t + patience_ - 1); }

  double service_weight(int t, int rho) const;      // q^p(t+1, rho+1) * W
  double relocation_weight(int i, int j, int t) const;  // q^r_ij(t+1)

  KvDocument to_kv() const;
  static MpcInstance from_kv(const KvDocument& doc);

 private:
  ScenarioConfig config_;
  TravelMatrix travel_;
  int zones_ = 0;
  int horizon_ = 0;
  int patience_ = 0;
  std::vector<int> idle_;
  DemandTensor baseline_;
  std::vector<int> options_;
};

// V_it counts vehicles that are idle at `now` or become idle during epoch t
// in their (destination) zone; later arrivals are outside the horizon.
std::vector<int> idle_forecast(const FleetSnapshot& fleet, int zones, int horizon, int epoch_seconds);

MpcInstance build_instance(const DemandTensor& demand, const FleetSnapshot& fleet, const ScenarioConfig& config,
                           const TravelMatrix& travel);

enum class SolveStatus { kOptimal, kBudgetFeasible, kInfeasibleReported };
std::string to_string(SolveStatus s);

class MpcSolution {
 public:
  MpcSolution() = default;
  explicit MpcSolution(const MpcInstance& instance);  // all zeros, multiplier index 0

  int zones = 0;
  int horizon = 0;
  int patience = 0;
  std::vector<int> choice;     // multiplier index per (i, t)
  std::vector<int> relocate;   // x^r per (i, j, t); diagonal must stay 0
  std::vector<int> pickup;     // x^p per (i, j, t0, rho - t0)
  std::vector<int> served;     // v per (i, j, t)
  double objective = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  std::int64_t nodes = 0;

  int& k(int i, int t) { return choice[static_cast<std::size_t>(i) * horizon + t]; }
  int k(int i, int t) const { return choice[static_cast<std::size_t>(i) * horizon + t]; }
  int& xr(int i, int j, int t) { return relocate[(static_cast<std::size_t>(i) * zones + j) * horizon + t]; }
  int xr(int i, int j, int t) const { return relocate[(static_cast<std::size_t>(i) * zones + j) * horizon + t]; }
  int& xp(int i, int j, int t0, int rho) { return pickup[pickup_index(i, j, t0, rho)]; }
  int xp(int i, int j, int t0, int rho) const { return pickup[pickup_index(i, j, t0, rho)]; }
  int& v(int i, int j, int t) { return served[(static_cast<std::size_t>(i) * zones + j) * horizon + t]; }
  int v(int i, int j, int t) const { return served[(static_cast<std::size_t>(i) * zones + j) * horizon + t]; }

  std::size_t pickup_index(int i, int j, int t0, int rho) const {
    return ((static_cast<std::size_t>(i) * zones + j) * horizon + t0) * patience + (rho - t0);
  }

  KvDocument to_kv() const;
  static MpcSolution from_kv(const KvDocument& doc);
};

enum class ViolationKind {
  kShape,
  kMultiplierChoice,
  kDemandLink,
  kServiceGuarantee,
  kServiceExcess,
  kFlowBalance,
  kRelocationBacklog,
  kSelfRelocation,
  kPickupWindow,
  kNegative,
};
std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int i = -1;
  int j = -1;
  int t = -1;
  std::string detail;
};

struct ViolationReport {
  std::vector<Violation> violations;
  bool empty() const { return violations.empty(); }
  std::vector<ViolationKind> kinds() const;  // distinct, in first-seen order
};

// Checks every constraint of the pricing-and-relocation program. Backlog
// gating is checked as the implication "relocation out of (i,t) => zero
// backlog at (i,t)"; idle vehicles not used at (i,t) carry to (i,t+1).
ViolationReport validate_solution(const MpcInstance& instance, const MpcSolution& candidate);

// Recomputed from (x^p, x^r) alone.
double compute_objective(const MpcInstance& instance, const MpcSolution& solution);

// Backlog at the end of (i, t): demand placed within the window that is still unserved.
int backlog(const MpcInstance& instance, const MpcSolution& solution, int i, int t);

struct MpcLimits {
  std::int64_t max_nodes = 5'000'000;
  double max_seconds = 0.0;  // 0 disables the wall-clock limit
  bool seed_with_heuristic = true;
  std::int64_t heuristic_evaluations = 4000;
};

// Feasible for every instance: each (i,t) with demand uses the zero multiplier.
MpcSolution priced_out_solution(const MpcInstance& instance);

// Depth-first branch and bound over (multiplier, pickups, relocations) in
// chronological order with a combinatorial upper bound.
MpcSolution solve_exact(const MpcInstance& instance, const MpcLimits& limits = {});

struct HeuristicLimits {
  std::int64_t max_evaluations = 4000;
  double max_seconds = 0.0;
};

// Greedy multiplier descent followed by first-improvement local search.
MpcSolution solve_heuristic(const MpcInstance& instance, const HeuristicLimits& limits = {});

// Greedy chronological service for fixed multipliers and relocations. Returns
// false if a service guarantee, a supply bound or the backlog gate fails.
struct ServeResult {
  bool feasible = false;
  MpcSolution solution;
  std::vector<int> shortfall;  // unmet mandatory demand per (i, t0)
};
ServeResult serve_greedy(const MpcInstance& instance, const std::vector<int>& choice, const std::vector<int>& relocate);

struct FirstEpochActions {
  std::vector<int> multiplier_index;  // per zone
  std::vector<double> gamma;          // per zone
  RelocationMatrix relocation;        // x^r_ij1
  std::vector<int> out_totals;        // y^o_i
  std::vector<int> in_totals;         // y^d_i
};
FirstEpochActions first_epoch_actions(const MpcInstance& instance, const MpcSolution& solution);

// ---------------------------------------------------------------- MIP form

struct MipVariable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  bool binary = false;
  double objective = 0.0;
};

struct MipRow {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  char sense = '=';  // '<', '>', '='
  double rhs = 0.0;
};

// The program with explicit carry and big-M indicator variables.
struct MipModel {
  std::vector<MipVariable> variables;
  std::vector<MipRow> rows;
  double big_m = 0.0;
  int find(const std::string& name) const;
};

MipModel build_mip(const MpcInstance& instance);
// CPLEX LP text format.
void write_lp(std::ostream& out, const MipModel& model);

}  // namespace ridemp
