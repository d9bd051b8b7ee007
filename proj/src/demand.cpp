#include "ridemp/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ridemp {

void RequestStream::validate(int zone_count) const {
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& r : requests) {
    if (r.origin < 0 || r.origin >= zone_count || r.dest < 0 || r.dest >= zone_count) {
      throw std::invalid_argument("request " + std::to_string(r.id) + ": zone out of range");
    }
    if (!std::isfinite(r.time_s) || r.time_s < last) {
      throw std::invalid_argument("request " + std::to_string(r.id) + ": times must be nondecreasing");
    }
    if (r.riders < 1) throw std::invalid_argument("request " + std::to_string(r.id) + ": riders must be positive");
    last = r.time_s;
  }
}

void write_request_stream(std::ostream& out, const RequestStream& stream) {
  out << "id,origin,dest,time_s,riders\n";
  for (const auto& r : stream.requests) {
    out << r.id << ',' << r.origin << ',' << r.dest << ',' << format_double(r.time_s) << ',' << r.riders << '\n';
  }
}

void save_request_stream(const std::string& path, const RequestStream& stream) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  write_request_stream(out, stream);
}

RequestStream read_request_stream(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("request stream: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,origin,dest,time_s,riders") throw FormatError("request stream: unexpected header '" + line + "'");
  RequestStream stream;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    Request r;
    char c1, c2, c3, c4;
    if (!(row >> r.id >> c1 >> r.origin >> c2 >> r.dest >> c3 >> r.time_s >> c4 >> r.riders) || c1 != ',' ||
        c2 != ',' || c3 != ',' || c4 != ',') {
      throw FormatError("request stream line " + std::to_string(line_no) + ": malformed row");
    }
    stream.requests.push_back(r);
  }
  return stream;
}

RequestStream load_request_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_request_stream(in);
}

int DemandTensor::origin_total(int i, int t) const {
  int total = 0;
  for (int j = 0; j < zones; ++j) total += at(i, j, t);
  return total;
}

void write_demand_tensor(std::ostream& out, const DemandTensor& tensor) {
  out << "# demand tensor zones=" << tensor.zones << " epochs=" << tensor.epochs << '\n';
  out << "origin,dest,epoch,vehicles\n";
  for (int i = 0; i < tensor.zones; ++i)
    for (int j = 0; j < tensor.zones; ++j)
      for (int t = 0; t < tensor.epochs; ++t) out << i << ',' << j << ',' << t << ',' << tensor.at(i, j, t) << '\n';
}

void DestinationDistribution::validate() const {
  if (probs.size() != static_cast<std::size_t>(zones) * zones) throw std::invalid_argument("mu: shape mismatch");
  for (int i = 0; i < zones; ++i) {
    double sum = 0.0;
    for (int j = 0; j < zones; ++j) {
      if (!(at(i, j) >= 0.0)) throw std::invalid_argument("mu: negative entry");
      sum += at(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("mu: row " + std::to_string(i) + " does not sum to 1");
  }
}

namespace {

std::vector<int> default_residential(int zones) {
  std::vector<int> out;
  for (int z = 0; z < std::max(1, zones / 2); ++z) out.push_back(z);
  return out;
}

// Distributes `total` over destinations with the given weights.
void spread(DemandProfile& p, int e, int i, double total, const std::vector<double>& weights) {
  const double norm = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (int j = 0; j < p.zones; ++j) p.rate(e, i, j) = norm > 0 ? total * weights[j] / norm : 0.0;
}

}  // namespace

DemandProfile make_profile(std::string_view pattern, const ScenarioConfig& config, const ProfileParams& params) {
  DemandProfile p;
  p.pattern = std::string(pattern);
  p.zones = config.zone_count;
  p.epochs = config.episode_epochs;
  p.two_rider_probability = params.two_rider_probability;
  p.rates.assign(static_cast<std::size_t>(p.epochs) * p.zones * p.zones, 0.0);
  const int z = p.zones;
  const double r = params.base_rate;

  if (pattern == "uniform") {
    const std::vector<double> w(z, 1.0);
    for (int e = 0; e < p.epochs; ++e)
      for (int i = 0; i < z; ++i) spread(p, e, i, r, w);
  } else if (pattern == "hub-and-spoke") {
    if (params.hub < 0 || params.hub >= z) throw std::invalid_argument("hub-and-spoke: hub out of range");
    p.hub = params.hub;
    for (int e = 0; e < p.epochs; ++e) {
      for (int i = 0; i < z; ++i) {
        std::vector<double> w(z, 0.0);
        if (i == p.hub) {
          for (int j = 0; j < z; ++j) w[j] = (j == p.hub) ? 0.5 : 1.0;
          spread(p, e, i, 0.5 * r, w);
        } else {
          // Most spoke trips end at the hub, so idle vehicles pile up there.
          for (int j = 0; j < z; ++j) w[j] = (j == p.hub) ? 0.7 * std::max(1, z - 1) : 0.3;
          spread(p, e, i, r, w);
        }
      }
    }
  } else if (pattern == "morning-rush") {
    p.residential = params.residential.empty() ? default_residential(z) : params.residential;
    std::vector<bool> is_res(z, false);
    for (int zone : p.residential) {
      if (zone < 0 || zone >= z) throw std::invalid_argument("morning-rush: residential zone out of range");
      is_res[zone] = true;
    }
    const auto res_count = static_cast<double>(p.residential.size());
    const double bus_count = std::max(1.0, z - res_count);
    for (int e = 0; e < p.epochs; ++e) {
      // Triangular ramp peaking mid-episode.
      const double phase = p.epochs > 1 ? static_cast<double>(e) / (p.epochs - 1) : 0.5;
      const double ramp = 0.6 + 0.8 * (1.0 - std::abs(2.0 * phase - 1.0));
      for (int i = 0; i < z; ++i) {
        std::vector<double> w(z, 0.0);
        for (int j = 0; j < z; ++j) w[j] = is_res[i] ? (is_res[j] ? 0.2 / res_count : 0.8 / bus_count) : 1.0;
        // Residential origins carry 4x the business rate, scaled so that at
        // least 70% of trips start in residential zones.
        const double origin_rate = is_res[i] ? 4.0 * r * bus_count / res_count : r;
        spread(p, e, i, ramp * origin_rate, w);
      }
    }
  } else if (pattern == "custom-matrix") {
    const auto zz = static_cast<std::size_t>(z) * z;
    if (params.custom_rates.size() == zz) {
      for (int e = 0; e < p.epochs; ++e)
        std::copy(params.custom_rates.begin(), params.custom_rates.end(), p.rates.begin() + e * zz);
    } else if (params.custom_rates.size() == p.rates.size()) {
      p.rates = params.custom_rates;
    } else {
      throw std::invalid_argument("custom-matrix: expected zones^2 or epochs*zones^2 rates");
    }
    for (double v : p.rates)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("custom-matrix: rates must be finite and >= 0");
  } else {
    throw std::invalid_argument("unknown demand profile '" + std::string(pattern) + "'");
  }
  return p;
}

RequestStream generate_scenario_demand(const ScenarioConfig& config, const DemandProfile& profile, Rng& rng) {
  if (profile.zones != config.zone_count) throw std::invalid_argument("profile zone count does not match config");
  RequestStream stream;
  const double epoch = config.epoch_seconds;
  for (int e = 0; e < profile.epochs; ++e) {
    std::vector<Request> batch;
    for (int i = 0; i < profile.zones; ++i) {
      for (int j = 0; j < profile.zones; ++j) {
        const int n = rng.poisson(profile.rate(e, i, j) * config.demand_scale);
        for (int k = 0; k < n; ++k) {
          Request r;
          r.origin = i;
          r.dest = j;
          r.time_s = (e + rng.uniform()) * epoch;
          r.riders = rng.bernoulli(profile.two_rider_probability) ? 2 : 1;
          batch.push_back(r);
        }
      }
    }
    std::stable_sort(batch.begin(), batch.end(), [](const Request& a, const Request& b) { return a.time_s < b.time_s; });
    stream.requests.insert(stream.requests.end(), batch.begin(), batch.end());
  }
  for (std::size_t k = 0; k < stream.requests.size(); ++k) stream.requests[k].id = static_cast<std::int64_t>(k);
  return stream;
}

RequestStream perturb_stream(const RequestStream& stream, double percentage, int epoch_seconds, Rng& rng) {
  std::vector<Request> reqs = stream.requests;
  const auto change = round_half_up(std::abs(percentage) / 100.0 * static_cast<double>(reqs.size()));
  if (percentage < 0) {
    for (std::int64_t k = 0; k < change && !reqs.empty(); ++k) {
      const auto victim = rng.uniform_int(0, static_cast<std::int64_t>(reqs.size()) - 1);
      reqs.erase(reqs.begin() + victim);
    }
  } else if (!reqs.empty()) {
    const auto base = static_cast<std::int64_t>(reqs.size());
    for (std::int64_t k = 0; k < change; ++k) {
      Request copy = reqs[static_cast<std::size_t>(rng.uniform_int(0, base - 1))];
      const double epoch_start = std::floor(copy.time_s / epoch_seconds) * epoch_seconds;
      copy.time_s = epoch_start + rng.uniform() * epoch_seconds;
      reqs.push_back(copy);
    }
    std::stable_sort(reqs.begin(), reqs.end(), [](const Request& a, const Request& b) { return a.time_s < b.time_s; });
  }
  RequestStream out;
  out.requests = std::move(reqs);
  for (std::size_t k = 0; k < out.requests.size(); ++k) out.requests[k].id = static_cast<std::int64_t>(k);
  return out;
}

ZoneEpochTable count_zone_requests(const RequestStream& stream, int zones, int epoch_seconds, int epochs,
                                   double start_time_s) {
  ZoneEpochTable table(zones, epochs);
  for (const auto& r : stream.requests) {
    const auto t = static_cast<int>(std::floor((r.time_s - start_time_s) / epoch_seconds));
    if (t < 0 || t >= epochs) continue;
    table.at(r.origin, t) += 1.0;
  }
  return table;
}

ZoneEpochTable aggregate_zone_demand(const RequestStream& stream, const ScenarioConfig& config, int epochs,
                                     double start_time_s) {
  ZoneEpochTable riders(config.zone_count, epochs);
  for (const auto& r : stream.requests) {
    const auto t = static_cast<int>(std::floor((r.time_s - start_time_s) / config.epoch_seconds));
    if (t < 0 || t >= epochs) continue;
    riders.at(r.origin, t) += r.riders;
  }
  for (auto& v : riders.values) v = static_cast<double>(round_half_up(v / config.rideshare));
  return riders;
}

DemandTensor disaggregate(const ZoneEpochTable& zone_demand, const DestinationDistribution& mu) {
  if (mu.zones != zone_demand.zones) throw std::invalid_argument("disaggregate: zone mismatch");
  DemandTensor out(zone_demand.zones, zone_demand.epochs);
  for (int i = 0; i < out.zones; ++i)
    for (int j = 0; j < out.zones; ++j)
      for (int t = 0; t < out.epochs; ++t) {
        const double d = std::max(0.0, zone_demand.at(i, t));
        out.at(i, j, t) = static_cast<int>(round_half_up(d * mu.at(i, j)));
      }
  return out;
}

DestinationDistribution estimate_destination_distribution(const std::vector<RequestStream>& streams, int zones) {
  DestinationDistribution mu;
  mu.zones = zones;
  mu.probs.assign(static_cast<std::size_t>(zones) * zones, 1.0);
  for (const auto& s : streams)
    for (const auto& r : s.requests) mu.probs[static_cast<std::size_t>(r.origin) * zones + r.dest] += 1.0;
  for (int i = 0; i < zones; ++i) {
    double sum = 0.0;
    for (int j = 0; j < zones; ++j) sum += mu.probs[static_cast<std::size_t>(i) * zones + j];
    for (int j = 0; j < zones; ++j) mu.probs[static_cast<std::size_t>(i) * zones + j] /= sum;
  }
  return mu;
}

DestinationDistribution profile_destination_distribution(const DemandProfile& profile, int epoch) {
  DestinationDistribution mu;
  mu.zones = profile.zones;
  mu.probs.assign(static_cast<std::size_t>(profile.zones) * profile.zones, 0.0);
  const int e = std::clamp(epoch, 0, profile.epochs - 1);
  for (int i = 0; i < profile.zones; ++i) {
    double sum = 0.0;
    for (int j = 0; j < profile.zones; ++j) sum += profile.rate(e, i, j);
    for (int j = 0; j < profile.zones; ++j) {
      mu.probs[static_cast<std::size_t>(i) * profile.zones + j] =
          sum > 0 ? profile.rate(e, i, j) / sum : 1.0 / profile.zones;
    }
  }
  return mu;
}

DemandTensor forecast_from_profile(const DemandProfile& profile, const ScenarioConfig& config, int first_epoch,
                                   int horizon) {
  DemandTensor out(profile.zones, horizon);
  for (int t = 0; t < horizon; ++t) {
    const int e = first_epoch + t;
    if (e < 0 || e >= profile.epochs) continue;
    ZoneEpochTable zone(profile.zones, 1);
    for (int i = 0; i < profile.zones; ++i) {
      double riders = 0.0;
      for (int j = 0; j < profile.zones; ++j) riders += profile.rate(e, i, j);
      riders *= profile.mean_riders() * config.demand_scale;
      zone.at(i, 0) = static_cast<double>(round_half_up(riders / config.rideshare));
    }
    const auto slice = disaggregate(zone, profile_destination_distribution(profile, e));
    for (int i = 0; i < profile.zones; ++i)
      for (int j = 0; j < profile.zones; ++j) out.at(i, j, t) = slice.at(i, j, 0);
  }
  return out;
}

double smape(const std::vector<double>& actual, const std::vector<double>& predicted) {
  if (actual.size() != predicted.size() || actual.empty()) throw std::invalid_argument("smape: size mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    const double denom = std::abs(actual[k]) + std::abs(predicted[k]);
    if (denom > 0) total += 2.0 * std::abs(actual[k] - predicted[k]) / denom;
  }
  return 100.0 * total / static_cast<double>(actual.size());
}

}  // namespace ridemp
