#include "ridemp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ridemp {

int SimState::idle_in(int zone) const {
  int n = 0;
  for (const auto& v : vehicles) n += v.activity == VehicleActivity::kIdle && v.zone == zone ? 1 : 0;
  return n;
}

std::vector<int> SimState::idle_by_zone(int zones) const {
  std::vector<int> out(zones, 0);
  for (const auto& v : vehicles)
    if (v.activity == VehicleActivity::kIdle) ++out[v.zone];
  return out;
}

FleetSnapshot SimState::snapshot() const {
  FleetSnapshot s;
  s.now = clock;
  for (const auto& v : vehicles) {
    s.vehicles.push_back({v.zone, v.activity == VehicleActivity::kIdle ? clock : v.busy_until});
  }
  return s;
}

SimState initial_state(const ScenarioConfig& config) {
  SimState s;
  for (int v = 0; v < config.fleet_size; ++v) {
    SimVehicle veh;
    veh.id = v;
    veh.zone = v % config.zone_count;
    s.vehicles.push_back(veh);
  }
  s.gamma.assign(config.zone_count, 1.0);
  return s;
}

bool retain_request(const Request& request, double gamma, const Rng& rng) {
  if (gamma >= 1.0) return true;
  if (gamma <= 0.0) return false;
  return rng.substream("pricing-discard/" + std::to_string(request.id)).uniform() < gamma;
}

void apply_pricing(SimState& state, const std::vector<double>& gamma, const Rng& rng) {
  state.gamma = gamma;
  std::vector<OpenRequest> kept;
  for (auto& r : state.open) {
    if (r.epoch == state.epoch && !retain_request(r.request, gamma[r.request.origin], rng)) {
      ++state.counters.discarded;
    } else {
      kept.push_back(std::move(r));
    }
  }
  state.open = std::move(kept);
}

RelocationCheck validate_relocation(const RelocationMatrix& plan, const std::vector<int>& first_epoch_idle) {
  RelocationCheck check;
  auto fail = [&](std::string msg) {
    check.ok = false;
    check.problems.push_back(std::move(msg));
  };
  if (static_cast<int>(first_epoch_idle.size()) != plan.zones ||
      plan.counts.size() != static_cast<std::size_t>(plan.zones) * plan.zones) {
    fail("plan shape does not match the fleet");
    return check;
  }
  for (int i = 0; i < plan.zones; ++i) {
    int out = 0;
    for (int j = 0; j < plan.zones; ++j) {
      const int x = plan.at(i, j);
      if (x < 0) fail("negative relocation " + std::to_string(i) + "->" + std::to_string(j));
      if (i == j && x != 0) fail("self relocation in zone " + std::to_string(i));
      if (i != j) out += x;
    }
    if (out > first_epoch_idle[i]) {
      fail("zone " + std::to_string(i) + " sends " + std::to_string(out) + " vehicles, " +
           std::to_string(first_epoch_idle[i]) + " available");
    }
  }
  return check;
}

namespace {

void dispatch(SimState& state, PendingRelocation& order, const TravelMatrix& travel, double intra_zone_seconds) {
  for (auto& v : state.vehicles) {
    if (order.count == 0) break;
    if (v.activity != VehicleActivity::kIdle || v.zone != order.from) continue;
    v.activity = VehicleActivity::kRelocating;
    v.zone = order.to;
    v.busy_until = state.clock + zone_travel_seconds(travel, order.from, order.to, intra_zone_seconds);
    v.onboard = 0;
    --order.count;
    ++state.counters.relocations;
  }
}

}  // namespace

void apply_relocation(SimState& state, const RelocationMatrix& plan, const std::vector<int>& first_epoch_idle,
                      const TravelMatrix& travel, double intra_zone_seconds) {
  const auto check = validate_relocation(plan, first_epoch_idle);
  if (!check.ok) {
    std::string msg = "relocation plan rejected:";
    for (const auto& p : check.problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
  for (int i = 0; i < plan.zones; ++i)
    for (int j = 0; j < plan.zones; ++j) {
      if (i == j || plan.at(i, j) == 0) continue;
      PendingRelocation order{i, j, plan.at(i, j)};
      dispatch(state, order, travel, intra_zone_seconds);
      if (order.count > 0) state.pending.push_back(order);
    }
}

std::string to_string(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::kNone: return "none";
    case PolicyKind::kRelocationOnly: return "relocation-only";
    case PolicyKind::kMpcHeuristic: return "mpc-heuristic";
    case PolicyKind::kMpcExact: return "mpc-exact";
    case PolicyKind::kMpcClustered: return "mpc-clustered";
    case PolicyKind::kProxy: return "proxy";
  }
  return "unknown";
}

PolicyKind policy_from_string(const std::string& name) {
  for (auto p : {PolicyKind::kNone, PolicyKind::kRelocationOnly, PolicyKind::kMpcHeuristic, PolicyKind::kMpcExact,
                 PolicyKind::kMpcClustered, PolicyKind::kProxy}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown policy '" + name + "'");
}

// ------------------------------------------------------------ metrics rows

std::string metrics_header() {
  return "policy,seed,arrivals,served,riders_served,dropped,discarded,open,relocations,dropout_pct,mean_wait_s,"
         "policy_calls,conservation_violations,aborted,diagnostic";
}

std::string metrics_row(const Metrics& m) {
  std::string diag = m.diagnostic;
  std::replace(diag.begin(), diag.end(), ',', ';');
  std::replace(diag.begin(), diag.end(), '\n', ' ');
  std::ostringstream out;
  out << m.policy << ',' << m.seed << ',' << m.arrivals << ',' << m.served << ',' << m.riders_served << ','
      << m.dropped << ',' << m.discarded << ',' << m.open << ',' << m.relocations << ',' << format_double(m.dropout_pct)
      << ',' << format_double(m.mean_wait_s) << ',' << m.policy_calls << ',' << m.conservation_violations << ','
      << (m.aborted ? 1 : 0) << ',' << diag;
  return out.str();
}

Metrics parse_metrics_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 15) throw FormatError("metrics row: expected 15 fields, got " + std::to_string(f.size()));
  Metrics m;
  m.policy = f[0];
  m.seed = std::stoull(f[1]);
  m.arrivals = std::stoll(f[2]);
  m.served = std::stoll(f[3]);
  m.riders_served = std::stoll(f[4]);
  m.dropped = std::stoll(f[5]);
  m.discarded = std::stoll(f[6]);
  m.open = std::stoll(f[7]);
  m.relocations = std::stoll(f[8]);
  m.dropout_pct = std::stod(f[9]);
  m.mean_wait_s = std::stod(f[10]);
  m.policy_calls = std::stoll(f[11]);
  m.conservation_violations = std::stoll(f[12]);
  m.aborted = f[13] == "1";
  m.diagnostic = f[14];
  return m;
}

// ------------------------------------------------------------ clustering

MpcInstance cluster_instance(const MpcInstance& in, const std::vector<int>& merge_map) {
  const int z = in.zones(), horizon = in.horizon();
  if (static_cast<int>(merge_map.size()) != z) throw std::invalid_argument("cluster_instance: merge map size");
  const int c = *std::max_element(merge_map.begin(), merge_map.end()) + 1;
  std::vector<int> members(c, 0);
  for (int m : merge_map) {
    if (m < 0) throw std::invalid_argument("cluster_instance: negative cluster id");
    ++members[m];
  }
  for (int n : members)
    if (n == 0) throw std::invalid_argument("cluster_instance: cluster ids must be contiguous");

  ScenarioConfig cfg = in.config();
  cfg.zone_count = c;
  TravelMatrix travel;
  travel.zones = c;
  travel.seconds.assign(static_cast<std::size_t>(c) * c, 0.0);
  travel.epochs.assign(static_cast<std::size_t>(c) * c, 1);
  for (int a = 0; a < c; ++a)
    for (int b = 0; b < c; ++b) {
      if (a == b) continue;
      double sum = 0.0;
      int n = 0;
      for (int i = 0; i < z; ++i)
        for (int j = 0; j < z; ++j)
          if (merge_map[i] == a && merge_map[j] == b) {
            sum += in.travel().eta(i, j);
            ++n;
          }
      const double eta = sum / n;
      travel.seconds[static_cast<std::size_t>(a) * c + b] = eta;
      travel.epochs[static_cast<std::size_t>(a) * c + b] =
          std::max(1, static_cast<int>(std::ceil(eta / cfg.epoch_seconds - 1e-9)));
    }
  std::vector<int> idle(static_cast<std::size_t>(c) * horizon, 0);
  DemandTensor d(c, horizon);
  for (int i = 0; i < z; ++i)
    for (int t = 0; t < horizon; ++t) {
      idle[static_cast<std::size_t>(merge_map[i]) * horizon + t] += in.idle(i, t);
      for (int j = 0; j < z; ++j) d.at(merge_map[i], merge_map[j], t) += in.baseline().at(i, j, t);
    }
  return MpcInstance(cfg, travel, idle, d);
}

ZoneActions expand_cluster_actions(const MpcInstance& in, const std::vector<int>& merge_map,
                                   const FirstEpochActions& clustered) {
  const int z = in.zones();
  const int c = clustered.relocation.zones;
  ZoneActions out;
  out.plan = RelocationMatrix(z);
  for (int i = 0; i < z; ++i) out.gamma.push_back(clustered.gamma[merge_map[i]]);
  std::vector<int> left(z);
  for (int i = 0; i < z; ++i) left[i] = in.idle(i, 0);
  std::vector<int> target(c, -1);
  for (int i = 0; i < z; ++i) {
    const int b = merge_map[i];
    if (target[b] < 0 || in.baseline().origin_total(i, 0) > in.baseline().origin_total(target[b], 0)) target[b] = i;
  }
  for (int a = 0; a < c; ++a)
    for (int b = 0; b < c; ++b) {
      if (a == b) continue;
      for (int n = 0; n < clustered.relocation.at(a, b); ++n) {
        int src = -1;
        for (int i = 0; i < z; ++i)
          if (merge_map[i] == a && left[i] > 0 && (src < 0 || left[i] > left[src])) src = i;
        if (src < 0) throw std::logic_error("expand_cluster_actions: cluster relocates more than its idle vehicles");
        --left[src];
        const int dst = target[b];
        if (dst != src) ++out.plan.at(src, dst);
      }
    }
  return out;
}

// ------------------------------------------------------------ episode

namespace {

class Episode {
 public:
  Episode(const ScenarioConfig& config, const DemandProfile& profile, const RequestStream& stream,
          const EpisodeOptions& options, std::uint64_t seed)
      : config_(config),
        profile_(profile),
        stream_(stream),
        options_(options),
        rng_(seed),
        pricing_rng_(rng_.substream("pricing-discard")),
        restore_rng_(rng_.substream("restoration")),
        travel_(build_travel_matrix(config)),
        state_(initial_state(config)) {
    metrics_.policy = to_string(options.policy);
    metrics_.seed = seed;
    if (config.epoch_seconds % config.router_batch_seconds != 0) {
      throw std::invalid_argument("run_episode: router batch must divide the epoch");
    }
    if (options.policy == PolicyKind::kProxy && !options.proxy) {
      throw std::invalid_argument("run_episode: proxy policy needs a trained proxy");
    }
    if (options.policy == PolicyKind::kMpcClustered && static_cast<int>(options.merge_map.size()) != config.zone_count) {
      throw std::invalid_argument("run_episode: clustered policy needs a merge map over all zones");
    }
  }

  Metrics run() {
    const int e_len = config_.epoch_seconds, batch = config_.router_batch_seconds;
    const double end = static_cast<double>(config_.episode_epochs) * e_len;
    try {
      boundary(0);
      for (long tick = batch;; tick += batch) {
        state_.clock = static_cast<double>(tick);
        ingest(std::min(state_.clock, end));
        release();
        for (auto& order : state_.pending) dispatch(state_, order, travel_, config_.intra_zone_seconds);
        std::erase_if(state_.pending, [](const PendingRelocation& p) { return p.count == 0; });
        drop_expired();
        route();
        check_conservation();
        if (tick % e_len == 0) {
          const int e = static_cast<int>(tick / e_len);
          write_trace(e - 1);
          if (e < config_.episode_epochs) boundary(e);
        }
        if (state_.clock >= end && state_.open.empty()) break;
      }
    } catch (const std::exception& ex) {
      metrics_.aborted = true;
      metrics_.diagnostic = ex.what();
    }
    finish();
    return metrics_;
  }

 private:
  void ingest(double until) {
    while (next_ < stream_.requests.size() && stream_.requests[next_].time_s < until) {
      const Request& r = stream_.requests[next_++];
      ++state_.counters.arrivals;
      const int epoch = static_cast<int>(std::floor(r.time_s / config_.epoch_seconds));
      const double gamma = epoch == state_.epoch ? state_.gamma[r.origin] : 1.0;
      if (!retain_request(r, gamma, pricing_rng_)) {
        ++state_.counters.discarded;
        continue;
      }
      state_.open.push_back({r, epoch, config_.unserved_penalty_seconds});
    }
  }

  void release() {
    for (auto& v : state_.vehicles) {
      if (v.activity != VehicleActivity::kIdle && v.busy_until <= state_.clock) {
        v.activity = VehicleActivity::kIdle;
        v.onboard = 0;
      }
    }
  }

  void drop_expired() {
    const double limit = static_cast<double>(config_.match_patience_epochs) * config_.epoch_seconds;
    std::erase_if(state_.open, [&](const OpenRequest& r) {
      if (state_.clock - r.request.time_s > limit + 1e-9) {
        ++state_.counters.dropped;
        return true;
      }
      return false;
    });
  }

  void route() {
    if (state_.open.empty()) return;
    RouterFleet fleet{state_.idle_by_zone(config_.zone_count)};
    std::vector<RouterRequest> batch;
    for (const auto& r : state_.open) {
      batch.push_back({r.request.id, r.request.origin, r.request.dest, r.request.time_s, r.request.riders, r.penalty});
    }
    RouterOptions o;
    o.now = state_.clock;
    o.max_pickups = options_.router_max_pickups;
    o.capacity = config_.vehicle_capacity;
    o.detour_factor = config_.detour_factor;
    o.intra_zone_seconds = config_.intra_zone_seconds;
    o.pickup_deadline_seconds = static_cast<double>(config_.pickup_patience_epochs) * config_.epoch_seconds;
    o.pickup_radius_seconds = config_.pickup_radius_seconds;
    o.node_budget = options_.router_node_budget;
    const auto result = solve_routing(fleet, batch, travel_, o);

    std::vector<char> matched(batch.size(), 0);
    for (const auto& route : result.selected) {
      SimVehicle* veh = nullptr;
      for (auto& v : state_.vehicles)
        if (v.activity == VehicleActivity::kIdle && v.zone == route.zone) {
          veh = &v;
          break;
        }
      if (!veh) throw std::logic_error("router selected more routes than idle vehicles");
      veh->activity = VehicleActivity::kServing;
      veh->zone = route.end_zone;
      veh->busy_until = route.finish_at;
      veh->onboard = route.riders;
      for (std::size_t q = 0; q < route.requests.size(); ++q) {
        const int i = route.requests[q];
        matched[i] = 1;
        ++state_.counters.served;
        state_.counters.riders_served += batch[i].riders;
        state_.counters.total_wait += route.pickup_at[q] - batch[i].time_s;
      }
    }
    std::vector<OpenRequest> still;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (matched[i]) continue;
      auto r = state_.open[i];
      r.penalty *= config_.penalty_escalation;
      still.push_back(std::move(r));
    }
    state_.open = std::move(still);
  }

  void boundary(int e) {
    state_.clock = static_cast<double>(e) * config_.epoch_seconds;
    state_.epoch = e;
    state_.gamma.assign(config_.zone_count, 1.0);
    state_.pending.clear();
    if (options_.policy == PolicyKind::kNone) return;

    DemandTensor demand = forecast_from_profile(profile_, config_, e, config_.horizon);
    std::map<std::pair<int, int>, int> waiting;
    for (const auto& r : state_.open) waiting[{r.request.origin, r.request.dest}] += r.request.riders;
    for (const auto& [od, riders] : waiting)
      demand.at(od.first, od.second, 0) += static_cast<int>(round_half_up(riders / config_.rideshare));
    const MpcInstance instance = build_instance(demand, state_.snapshot(), config_, travel_);
    if (options_.record) options_.record->push_back(instance);
    std::vector<int> first_idle(config_.zone_count);
    for (int i = 0; i < config_.zone_count; ++i) first_idle[i] = instance.idle(i, 0);

    std::vector<double> gamma(config_.zone_count, 1.0);
    RelocationMatrix plan(config_.zone_count);
    switch (options_.policy) {
      case PolicyKind::kMpcHeuristic:
      case PolicyKind::kRelocationOnly: {
        const auto a = first_epoch_actions(instance, solve_heuristic(instance, options_.heuristic));
        if (options_.policy == PolicyKind::kMpcHeuristic) gamma = a.gamma;
        plan = a.relocation;
        break;
      }
      case PolicyKind::kMpcExact: {
        const auto a = first_epoch_actions(instance, solve_exact(instance, options_.exact));
        gamma = a.gamma;
        plan = a.relocation;
        break;
      }
      case PolicyKind::kMpcClustered: {
        const auto clustered = cluster_instance(instance, options_.merge_map);
        const auto a = first_epoch_actions(clustered, solve_heuristic(clustered, options_.heuristic));
        auto z = expand_cluster_actions(instance, options_.merge_map, a);
        gamma = z.gamma;
        plan = z.plan;
        break;
      }
      case PolicyKind::kProxy: {
        const auto d = options_.proxy->decide(instance, restore_rng_);
        metrics_.max_decision_seconds = std::max(metrics_.max_decision_seconds, d.seconds);
        gamma = d.pricing.gamma;
        plan = d.plan;
        break;
      }
      case PolicyKind::kNone: break;
    }
    ++metrics_.policy_calls;
    apply_pricing(state_, gamma, pricing_rng_);
    apply_relocation(state_, plan, first_idle, travel_, config_.intra_zone_seconds);
  }

  void check_conservation() {
    const auto& c = state_.counters;
    std::int64_t bad = 0;
    if (static_cast<int>(state_.vehicles.size()) != config_.fleet_size) ++bad;
    if (c.served + c.dropped + c.discarded + static_cast<std::int64_t>(state_.open.size()) != c.arrivals) ++bad;
    for (const auto& v : state_.vehicles) {
      if (v.onboard < 0 || v.onboard > config_.vehicle_capacity) ++bad;
      if (v.activity != VehicleActivity::kIdle && v.busy_until < state_.clock) ++bad;
      if (v.activity != VehicleActivity::kServing && v.onboard != 0) ++bad;
      if (v.zone < 0 || v.zone >= config_.zone_count) ++bad;
    }
    metrics_.conservation_violations += bad;
  }

  void write_trace(int epoch) {
    if (!options_.trace) return;
    if (!trace_header_) {
      *options_.trace << "# ridemp trace v1\nepoch,clock_s,arrivals,served,dropped,discarded,open,idle,relocations\n";
      trace_header_ = true;
    }
    int idle = 0;
    for (int n : state_.idle_by_zone(config_.zone_count)) idle += n;
    const auto& c = state_.counters;
    *options_.trace << epoch << ',' << format_double(state_.clock) << ',' << c.arrivals << ',' << c.served << ','
                    << c.dropped << ',' << c.discarded << ',' << state_.open.size() << ',' << idle << ','
                    << c.relocations << '\n';
  }

  void finish() {
    const auto& c = state_.counters;
    metrics_.arrivals = c.arrivals;
    metrics_.served = c.served;
    metrics_.riders_served = c.riders_served;
    metrics_.dropped = c.dropped;
    metrics_.discarded = c.discarded;
    metrics_.open = static_cast<std::int64_t>(state_.open.size());
    metrics_.relocations = c.relocations;
    metrics_.dropout_pct = c.arrivals > 0 ? 100.0 * static_cast<double>(c.dropped) / static_cast<double>(c.arrivals) : 0.0;
    metrics_.mean_wait_s = c.served > 0 ? c.total_wait / static_cast<double>(c.served) : 0.0;
  }

  const ScenarioConfig& config_;
  const DemandProfile& profile_;
  const RequestStream& stream_;
  const EpisodeOptions& options_;
  Rng rng_;
  Rng pricing_rng_;
  Rng restore_rng_;
  TravelMatrix travel_;
  SimState state_;
  Metrics metrics_;
  std::size_t next_ = 0;
  bool trace_header_ = false;
};

}  // namespace

Metrics run_episode(const ScenarioConfig& config, const DemandProfile& profile, const RequestStream& stream,
                    const EpisodeOptions& options, std::uint64_t seed) {
  config.validate();
  stream.validate(config.zone_count);
  Episode episode(config, profile, stream, options, seed);
  return episode.run();
}

}  // namespace ridemp
