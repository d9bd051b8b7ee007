#include "ridemp/mpc.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ridemp {
namespace {

constexpr int kInstanceSchemaVersion = 1;

void put_travel(KvDocument& doc, const TravelMatrix& travel) {
  doc.set("travel.zones", travel.zones);
  doc.set("travel.seconds", travel.seconds);
  doc.set("travel.epochs", travel.epochs);
}

TravelMatrix get_travel(const KvDocument& doc) {
  TravelMatrix t;
  t.zones = static_cast<int>(doc.get_int("travel.zones"));
  t.seconds = doc.get_doubles("travel.seconds");
  t.epochs = doc.get_ints("travel.epochs");
  const auto n = static_cast<std::size_t>(t.zones) * t.zones;
  if (t.seconds.size() != n || t.epochs.size() != n) throw FormatError("travel: shape mismatch");
  return t;
}

}  // namespace

MpcInstance::MpcInstance(ScenarioConfig config, TravelMatrix travel, std::vector<int> idle, DemandTensor baseline)
    : config_(std::move(config)),
      travel_(std::move(travel)),
      zones_(travel_.zones),
      horizon_(config_.horizon),
      patience_(config_.patience),
      idle_(std::move(idle)),
      baseline_(std::move(baseline)) {
  if (zones_ < 1) throw std::invalid_argument("MpcInstance: no zones");
  if (config_.zone_count != zones_) throw std::invalid_argument("MpcInstance: config zone_count != travel zones");
  if (patience_ < 1 || patience_ > horizon_) throw std::invalid_argument("MpcInstance: patience outside [1, T]");
  if (idle_.size() != static_cast<std::size_t>(zones_) * horizon_) throw std::invalid_argument("MpcInstance: idle shape");
  if (baseline_.zones != zones_ || baseline_.epochs != horizon_) {
    throw std::invalid_argument("MpcInstance: demand horizon mismatch (" + std::to_string(baseline_.epochs) +
                                " epochs, expected " + std::to_string(horizon_) + ")");
  }
  for (int v : idle_)
    if (v < 0) throw std::invalid_argument("MpcInstance: negative idle count");
  for (int d : baseline_.values)
    if (d < 0) throw std::invalid_argument("MpcInstance: negative demand");
  const int kcount = multiplier_count();
  options_.assign(static_cast<std::size_t>(kcount) * baseline_.values.size(), 0);
  for (int k = 0; k < kcount; ++k)
    for (std::size_t c = 0; c < baseline_.values.size(); ++c)
      options_[k * baseline_.values.size() + c] =
          static_cast<int>(round_half_up(config_.multipliers[k] * baseline_.values[c]));
}

int MpcInstance::total_idle() const { return std::accumulate(idle_.begin(), idle_.end(), 0); }

double MpcInstance::service_weight(int t, int rho) const {
  return weight_qp(t + 1, rho + 1, config_) * config_.rideshare;
}

double MpcInstance::relocation_weight(int i, int j, int t) const { return weight_qr(i, j, t + 1, config_, travel_); }

KvDocument MpcInstance::to_kv() const {
  KvDocument doc;
  doc.set("schema_version", kInstanceSchemaVersion);
  doc.set("kind", "mpc-instance");
  for (const auto& key : config_.to_kv().keys()) {
    if (key != "schema_version") doc.set("config." + key, config_.to_kv().get_string(key));
  }
  put_travel(doc, travel_);
  doc.set("idle", idle_);
  doc.set("demand", baseline_.values);
  return doc;
}

MpcInstance MpcInstance::from_kv(const KvDocument& doc) {
  if (doc.get_int("schema_version") != kInstanceSchemaVersion || doc.get_string("kind") != "mpc-instance") {
    throw FormatError("not a supported mpc-instance document");
  }
  KvDocument cfg;
  cfg.set("schema_version", kConfigSchemaVersion);
  for (const auto& key : doc.keys()) {
    if (key.rfind("config.", 0) == 0) cfg.set(key.substr(7), doc.get_string(key));
  }
  auto config = ScenarioConfig::from_kv(cfg);
  auto travel = get_travel(doc);
  DemandTensor demand(travel.zones, config.horizon);
  demand.values = doc.get_ints("demand");
  if (demand.values.size() != static_cast<std::size_t>(travel.zones) * travel.zones * config.horizon) {
    throw FormatError("mpc-instance: demand shape mismatch");
  }
  return MpcInstance(std::move(config), std::move(travel), doc.get_ints("idle"), std::move(demand));
}

std::vector<int> idle_forecast(const FleetSnapshot& fleet, int zones, int horizon, int epoch_seconds) {
  std::vector<int> idle(static_cast<std::size_t>(zones) * horizon, 0);
  for (const auto& v : fleet.vehicles) {
    if (v.zone < 0 || v.zone >= zones) throw std::invalid_argument("idle_forecast: vehicle zone out of range");
    int t = 0;
    if (v.available_at > fleet.now) t = static_cast<int>(std::floor((v.available_at - fleet.now) / epoch_seconds));
    if (t < horizon) ++idle[static_cast<std::size_t>(v.zone) * horizon + t];
  }
  return idle;
}

MpcInstance build_instance(const DemandTensor& demand, const FleetSnapshot& fleet, const ScenarioConfig& config,
                           const TravelMatrix& travel) {
  if (demand.epochs != config.horizon) throw std::invalid_argument("build_instance: horizon mismatch");
  auto idle = idle_forecast(fleet, travel.zones, config.horizon, config.epoch_seconds);
  return MpcInstance(config, travel, std::move(idle), demand);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kBudgetFeasible: return "budget-feasible";
    case SolveStatus::kInfeasibleReported: return "infeasible-reported";
  }
  return "unknown";
}

MpcSolution::MpcSolution(const MpcInstance& instance)
    : zones(instance.zones()), horizon(instance.horizon()), patience(instance.patience()) {
  const auto z = static_cast<std::size_t>(zones), t = static_cast<std::size_t>(horizon);
  choice.assign(z * t, 0);
  relocate.assign(z * z * t, 0);
  pickup.assign(z * z * t * static_cast<std::size_t>(patience), 0);
  served.assign(z * z * t, 0);
}

KvDocument MpcSolution::to_kv() const {
  KvDocument doc;
  doc.set("schema_version", kInstanceSchemaVersion);
  doc.set("kind", "mpc-solution");
  doc.set("zones", zones);
  doc.set("horizon", horizon);
  doc.set("patience", patience);
  doc.set("status", to_string(status));
  doc.set("objective", objective);
  doc.set("nodes", static_cast<std::int64_t>(nodes));
  doc.set("choice", choice);
  doc.set("relocate", relocate);
  doc.set("pickup", pickup);
  doc.set("served", served);
  return doc;
}

MpcSolution MpcSolution::from_kv(const KvDocument& doc) {
  if (doc.get_int("schema_version") != kInstanceSchemaVersion || doc.get_string("kind") != "mpc-solution") {
    throw FormatError("not a supported mpc-solution document");
  }
  MpcSolution s;
  s.zones = static_cast<int>(doc.get_int("zones"));
  s.horizon = static_cast<int>(doc.get_int("horizon"));
  s.patience = static_cast<int>(doc.get_int("patience"));
  const auto& st = doc.get_string("status");
  s.status = st == "optimal" ? SolveStatus::kOptimal
             : st == "budget-feasible" ? SolveStatus::kBudgetFeasible
                                       : SolveStatus::kInfeasibleReported;
  s.objective = doc.get_double("objective");
  s.nodes = doc.get_int("nodes");
  s.choice = doc.get_ints("choice");
  s.relocate = doc.get_ints("relocate");
  s.pickup = doc.get_ints("pickup");
  s.served = doc.get_ints("served");
  return s;
}

MpcSolution priced_out_solution(const MpcInstance& instance) {
  MpcSolution s(instance);
  const int last = instance.multiplier_count() - 1;
  for (int i = 0; i < instance.zones(); ++i)
    for (int t = 0; t < instance.horizon(); ++t) {
      bool any = false;
      for (int j = 0; j < instance.zones(); ++j) any = any || instance.baseline().at(i, j, t) > 0;
      s.k(i, t) = any ? last : 0;
      for (int j = 0; j < instance.zones(); ++j) s.v(i, j, t) = instance.demand(s.k(i, t), i, j, t);
    }
  s.objective = 0.0;
  return s;
}

FirstEpochActions first_epoch_actions(const MpcInstance& instance, const MpcSolution& solution) {
  FirstEpochActions a;
  const int z = instance.zones();
  a.relocation = RelocationMatrix(z);
  a.out_totals.assign(z, 0);
  a.in_totals.assign(z, 0);
  for (int i = 0; i < z; ++i) {
    a.multiplier_index.push_back(solution.k(i, 0));
    a.gamma.push_back(instance.multiplier(solution.k(i, 0)));
    for (int j = 0; j < z; ++j) {
      if (i == j) continue;
      const int x = solution.xr(i, j, 0);
      a.relocation.at(i, j) = x;
      a.out_totals[i] += x;
      a.in_totals[j] += x;
    }
  }
  return a;
}

}  // namespace ridemp
