#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ridemp/core.hpp"
#include "ridemp/rng.hpp"

namespace ridemp {

struct Request {
  std::int64_t id = 0;
  int origin = 0;
  int dest = 0;
  double time_s = 0.0;
  int riders = 1;
};

// Requests ordered by nondecreasing time.
struct RequestStream {
  std::vector<Request> requests;

  std::size_t size() const { return requests.size(); }
  bool empty() const { return requests.empty(); }
  void validate(int zone_count) const;
};

void write_request_stream(std::ostream& out, const RequestStream& stream);
void save_request_stream(const std::string& path, const RequestStream& stream);
RequestStream read_request_stream(std::istream& in);
RequestStream load_request_stream(const std::string& path);

// Zone-by-epoch table, row-major by zone.
struct ZoneEpochTable {
  int zones = 0;
  int epochs = 0;
  std::vector<double> values;

  ZoneEpochTable() = default;
  ZoneEpochTable(int z, int e) : zones(z), epochs(e), values(static_cast<std::size_t>(z) * e, 0.0) {}
  double& at(int i, int t) { return values[static_cast<std::size_t>(i) * epochs + t]; }
  double at(int i, int t) const { return values[static_cast<std::size_t>(i) * epochs + t]; }
};

// Baseline zone-to-zone demand in vehicles, indexed (origin, dest, epoch).
struct DemandTensor {
  int zones = 0;
  int epochs = 0;
  std::vector<int> values;

  DemandTensor() = default;
  DemandTensor(int z, int e) : zones(z), epochs(e), values(static_cast<std::size_t>(z) * z * e, 0) {}
  std::size_t index(int i, int j, int t) const {
    return (static_cast<std::size_t>(i) * zones + j) * epochs + t;
  }
  int& at(int i, int j, int t) { return values[index(i, j, t)]; }
  int at(int i, int j, int t) const { return values[index(i, j, t)]; }
  int origin_total(int i, int t) const;
};

void write_demand_tensor(std::ostream& out, const DemandTensor& tensor);

// Row-stochastic destination distribution mu.
struct DestinationDistribution {
  int zones = 0;
  std::vector<double> probs;

  double at(int i, int j) const { return probs[static_cast<std::size_t>(i) * zones + j]; }
  void validate() const;
};

// Expected requests per (epoch, origin, dest) for one episode.
struct DemandProfile {
  std::string pattern;
  int zones = 0;
  int epochs = 0;
  std::vector<double> rates;
  std::vector<int> residential;  // designated origin-heavy zones (morning-rush)
  int hub = -1;                  // hub zone (hub-and-spoke)
  double two_rider_probability = 0.0;

  double rate(int e, int i, int j) const {
    return rates[(static_cast<std::size_t>(e) * zones + i) * zones + j];
  }
  double& rate(int e, int i, int j) { return rates[(static_cast<std::size_t>(e) * zones + i) * zones + j]; }
  double mean_riders() const { return 1.0 + two_rider_probability; }
};

struct ProfileParams {
  double base_rate = 4.0;  // requests per origin zone per epoch
  int hub = 0;
  std::vector<int> residential;  // default: lower half of zone indices
  // custom-matrix: zones*zones (constant) or epochs*zones*zones rates.
  std::vector<double> custom_rates;
  double two_rider_probability = 0.2;
};

// pattern: uniform | hub-and-spoke | morning-rush | custom-matrix.
DemandProfile make_profile(std::string_view pattern, const ScenarioConfig& config, const ProfileParams& params = {});

// Poisson arrivals per (origin, dest, epoch) at the profile rates scaled by
// config.demand_scale.
RequestStream generate_scenario_demand(const ScenarioConfig& config, const DemandProfile& profile, Rng& rng);

// Adds (percentage > 0) or deletes (< 0) round(|percentage|% of n) requests.
// Added requests copy a random existing trip with a fresh time in the same epoch.
RequestStream perturb_stream(const RequestStream& stream, double percentage, int epoch_seconds, Rng& rng);

// Vehicle-equivalent demand per (origin zone, epoch): rider totals / W, half-up.
ZoneEpochTable aggregate_zone_demand(const RequestStream& stream, const ScenarioConfig& config, int epochs,
                                     double start_time_s = 0.0);
// Request counts per (origin zone, epoch), no rider conversion.
ZoneEpochTable count_zone_requests(const RequestStream& stream, int zones, int epoch_seconds, int epochs,
                                   double start_time_s = 0.0);

// D0_ijt = round_half_up(D_it * mu_ij). Row sums are not renormalized.
DemandTensor disaggregate(const ZoneEpochTable& zone_demand, const DestinationDistribution& mu);

// Empirical destination frequencies with +1 Laplace smoothing per cell.
DestinationDistribution estimate_destination_distribution(const std::vector<RequestStream>& streams, int zones);
DestinationDistribution profile_destination_distribution(const DemandProfile& profile, int epoch);

// Expected baseline demand for epochs [first_epoch, first_epoch + horizon),
// built through the zone-level aggregate / disaggregate route.
DemandTensor forecast_from_profile(const DemandProfile& profile, const ScenarioConfig& config, int first_epoch,
                                   int horizon);

// Symmetric mean absolute percentage error in percent; pairs with both zero count as 0.
double smape(const std::vector<double>& actual, const std::vector<double>& predicted);

}  // namespace ridemp
