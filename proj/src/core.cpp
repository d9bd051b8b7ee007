#include "ridemp/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ridemp {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("ScenarioConfig: " + what);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(zone_count >= 1, "zone_count must be positive");
  require(grid_columns >= 1, "grid_columns must be positive");
  require(std::isfinite(zone_spacing_seconds) && zone_spacing_seconds > 0, "zone_spacing_seconds must be positive");
  require(std::isfinite(intra_zone_seconds) && intra_zone_seconds >= 0, "intra_zone_seconds must be nonnegative");
  require(std::isfinite(pickup_radius_seconds) && pickup_radius_seconds >= 0, "pickup_radius_seconds must be nonnegative");
  require(epoch_seconds >= 1, "epoch_seconds must be positive");
  require(horizon >= 1, "horizon must be positive");
  require(patience >= 1 && patience <= horizon, "patience must be in [1, horizon]");
  require(multipliers.size() >= 2, "need at least two multipliers");
  require(multipliers.front() == 1.0, "multipliers must start at 1");
  require(multipliers.back() == 0.0, "multipliers must end at 0");
  for (std::size_t k = 1; k < multipliers.size(); ++k) {
    require(multipliers[k] < multipliers[k - 1], "multipliers must be strictly decreasing");
  }
  require(std::isfinite(rideshare) && rideshare > 0, "rideshare must be positive");
  require(service_weight_base > 0 && service_weight_base < 1, "service_weight_base must be in (0,1)");
  require(service_weight_decay > 0 && service_weight_decay < 1, "service_weight_decay must be in (0,1)");
  require(relocation_weight_scale >= 0, "relocation_weight_scale must be nonnegative");
  require(big_m >= 0, "big_m must be nonnegative");
  require(fleet_size >= 1, "fleet_size must be positive");
  require(vehicle_capacity >= 1, "vehicle_capacity must be positive");
  require(router_batch_seconds >= 1 && epoch_seconds % router_batch_seconds == 0,
          "router_batch_seconds must divide epoch_seconds");
  require(episode_epochs >= 1, "episode_epochs must be positive");
  require(match_patience_epochs >= 1, "match_patience_epochs must be positive");
  require(pickup_patience_epochs >= match_patience_epochs, "pickup patience shorter than match patience");
  require(unserved_penalty_seconds > 0, "unserved_penalty_seconds must be positive");
  require(penalty_escalation >= 1, "penalty_escalation must be >= 1");
  require(detour_factor >= 1, "detour_factor must be >= 1");
  require(demand_scale >= 0, "demand_scale must be nonnegative");
}

KvDocument ScenarioConfig::to_kv() const {
  KvDocument doc;
  doc.set("schema_version", kConfigSchemaVersion);
  doc.set("zone_count", zone_count);
  doc.set("grid_columns", grid_columns);
  doc.set("zone_spacing_seconds", zone_spacing_seconds);
  doc.set("intra_zone_seconds", intra_zone_seconds);
  doc.set("pickup_radius_seconds", pickup_radius_seconds);
  doc.set("epoch_seconds", epoch_seconds);
  doc.set("horizon", horizon);
  doc.set("patience", patience);
  doc.set("multipliers", multipliers);
  doc.set("rideshare", rideshare);
  doc.set("service_weight_base", service_weight_base);
  doc.set("service_weight_decay", service_weight_decay);
  doc.set("relocation_weight_scale", relocation_weight_scale);
  doc.set("big_m", big_m);
  doc.set("fleet_size", fleet_size);
  doc.set("vehicle_capacity", vehicle_capacity);
  doc.set("router_batch_seconds", router_batch_seconds);
  doc.set("episode_epochs", episode_epochs);
  doc.set("match_patience_epochs", match_patience_epochs);
  doc.set("pickup_patience_epochs", pickup_patience_epochs);
  doc.set("unserved_penalty_seconds", unserved_penalty_seconds);
  doc.set("penalty_escalation", penalty_escalation);
  doc.set("detour_factor", detour_factor);
  doc.set("demand_scale", demand_scale);
  doc.set("rng_seed", rng_seed);
  return doc;
}

ScenarioConfig ScenarioConfig::from_kv(const KvDocument& doc) {
  const auto version = doc.get_int("schema_version");
  if (version != kConfigSchemaVersion) {
    throw FormatError("unsupported config schema_version " + std::to_string(version));
  }
  ScenarioConfig c;
  const auto known = c.to_kv().keys();
  for (const auto& key : doc.keys()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw FormatError("unknown config key '" + key + "'");
    }
  }
  auto int_or = [&](const char* key, int fallback) {
    return static_cast<int>(doc.get_int_or(key, fallback));
  };
  c.zone_count = int_or("zone_count", c.zone_count);
  c.grid_columns = int_or("grid_columns", c.grid_columns);
  c.zone_spacing_seconds = doc.get_double_or("zone_spacing_seconds", c.zone_spacing_seconds);
  c.intra_zone_seconds = doc.get_double_or("intra_zone_seconds", c.intra_zone_seconds);
  c.pickup_radius_seconds = doc.get_double_or("pickup_radius_seconds", c.pickup_radius_seconds);
  c.epoch_seconds = int_or("epoch_seconds", c.epoch_seconds);
  c.horizon = int_or("horizon", c.horizon);
  c.patience = int_or("patience", c.patience);
  if (doc.contains("multipliers")) c.multipliers = doc.get_doubles("multipliers");
  c.rideshare = doc.get_double_or("rideshare", c.rideshare);
  c.service_weight_base = doc.get_double_or("service_weight_base", c.service_weight_base);
  c.service_weight_decay = doc.get_double_or("service_weight_decay", c.service_weight_decay);
  c.relocation_weight_scale = doc.get_double_or("relocation_weight_scale", c.relocation_weight_scale);
  c.big_m = int_or("big_m", c.big_m);
  c.fleet_size = int_or("fleet_size", c.fleet_size);
  c.vehicle_capacity = int_or("vehicle_capacity", c.vehicle_capacity);
  c.router_batch_seconds = int_or("router_batch_seconds", c.router_batch_seconds);
  c.episode_epochs = int_or("episode_epochs", c.episode_epochs);
  c.match_patience_epochs = int_or("match_patience_epochs", c.match_patience_epochs);
  c.pickup_patience_epochs = int_or("pickup_patience_epochs", c.pickup_patience_epochs);
  c.unserved_penalty_seconds = doc.get_double_or("unserved_penalty_seconds", c.unserved_penalty_seconds);
  c.penalty_escalation = doc.get_double_or("penalty_escalation", c.penalty_escalation);
  c.detour_factor = doc.get_double_or("detour_factor", c.detour_factor);
  c.demand_scale = doc.get_double_or("demand_scale", c.demand_scale);
  if (doc.contains("rng_seed")) c.rng_seed = doc.get_uint("rng_seed");
  c.validate();
  return c;
}

std::vector<Point> grid_layout(int zone_count, int columns, double spacing_seconds) {
  if (zone_count < 1 || columns < 1) throw std::invalid_argument("grid_layout: bad dimensions");
  std::vector<Point> out;
  out.reserve(zone_count);
  for (int z = 0; z < zone_count; ++z) {
    out.push_back({(z % columns) * spacing_seconds, (z / columns) * spacing_seconds});
  }
  return out;
}

TravelMatrix build_travel_matrix(std::span<const Point> layout, int epoch_seconds) {
  if (layout.empty()) throw std::invalid_argument("build_travel_matrix: no zones");
  if (epoch_seconds < 1) throw std::invalid_argument("build_travel_matrix: epoch_seconds must be positive");
  for (const auto& p : layout) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("build_travel_matrix: non-finite coordinate");
    }
  }
  TravelMatrix m;
  m.zones = static_cast<int>(layout.size());
  const auto n = static_cast<std::size_t>(m.zones);
  m.seconds.assign(n * n, 0.0);
  m.epochs.assign(n * n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double eta = std::hypot(layout[i].x - layout[j].x, layout[i].y - layout[j].y);
      m.seconds[i * n + j] = eta;
      m.epochs[i * n + j] = std::max(1, static_cast<int>(std::ceil(eta / epoch_seconds - 1e-9)));
    }
  }
  return m;
}

TravelMatrix build_travel_matrix(const ScenarioConfig& config) {
  const auto layout = grid_layout(config.zone_count, config.grid_columns, config.zone_spacing_seconds);
  return build_travel_matrix(layout, config.epoch_seconds);
}

int pickup_window_size(int t, int horizon, int patience) {
  if (t < 1 || t > horizon) return 0;
  return std::min(patience, horizon - t + 1);
}

double weight_qp(int t, int rho, const ScenarioConfig& config) {
  if (t < 1 || rho < t || rho > std::min(config.horizon, t + config.patience - 1)) {
    throw std::out_of_range("weight_qp: rho=" + std::to_string(rho) + " outside pickup window of t=" +
                            std::to_string(t));
  }
  return std::pow(config.service_weight_base, t) * std::pow(config.service_weight_decay, rho - t);
}

double weight_qr(int i, int j, int t, const ScenarioConfig& config, const TravelMatrix& travel) {
  if (i < 0 || j < 0 || i >= travel.zones || j >= travel.zones) throw std::out_of_range("weight_qr: zone index");
  if (i == j) return 0.0;
  return config.relocation_weight_scale * std::pow(config.service_weight_base, t) * travel.eta(i, j);
}

std::int64_t round_half_up(double x) {
  // The epsilon absorbs representation error in products such as 5 * 0.1.
  return static_cast<std::int64_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace ridemp
