#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ridemp/demand.hpp"

using namespace ridemp;

namespace {

ScenarioConfig small_config(int zones, int epochs) {
  ScenarioConfig c;
  c.zone_count = zones;
  c.grid_columns = zones;
  c.episode_epochs = epochs;
  return c;
}

Request req(int origin, int dest, double t, int riders = 1) { return Request{0, origin, dest, t, riders}; }

}  // namespace

TEST(Generate, ZeroRateGivesEmptyStream) {
  const auto c = small_config(3, 4);
  ProfileParams p;
  p.base_rate = 0.0;
  const auto profile = make_profile("uniform", c, p);
  Rng rng(1);
  EXPECT_TRUE(generate_scenario_demand(c, profile, rng).empty());
}

TEST(Generate, UniformMeanMatchesPoissonOracle) {
  const auto c = small_config(2, 4);
  ProfileParams p;
  p.base_rate = 2.0;
  const auto profile = make_profile("uniform", c, p);
  const int seeds = 1000;
  double total = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    total += static_cast<double>(generate_scenario_demand(c, profile, rng).size());
  }
  // Poisson total with mean 2 zones * 4 epochs * 2.0 = 16.
  const double mean = total / seeds;
  EXPECT_NEAR(mean, 16.0, 3.0 * std::sqrt(16.0 / seeds));
}

TEST(Generate, MorningRushOriginatesInResidentialZones) {
  const auto c = small_config(6, 12);
  ProfileParams p;
  p.base_rate = 3.0;
  const auto profile = make_profile("morning-rush", c, p);
  Rng rng(5);
  const auto stream = generate_scenario_demand(c, profile, rng);
  ASSERT_GT(stream.size(), 100u);
  std::size_t res = 0;
  for (const auto& r : stream.requests)
    for (int z : profile.residential) res += r.origin == z ? 1 : 0;
  EXPECT_GE(static_cast<double>(res) / static_cast<double>(stream.size()), 0.7);
}

TEST(Generate, HubAndSpokeSendsSpokeTripsToHub) {
  const auto c = small_config(6, 1);
  ProfileParams p;
  p.hub = 2;
  const auto profile = make_profile("hub-and-spoke", c, p);
  for (int i = 0; i < 6; ++i) {
    if (i == 2) continue;
    for (int j = 0; j < 6; ++j)
      if (j != 2) EXPECT_GT(profile.rate(0, i, 2), profile.rate(0, i, j));
  }
}

TEST(Generate, SeedDeterministicAndValid) {
  const auto c = small_config(4, 6);
  const auto profile = make_profile("hub-and-spoke", c, {});
  Rng a(9), b(9);
  const auto s1 = generate_scenario_demand(c, profile, a);
  const auto s2 = generate_scenario_demand(c, profile, b);
  std::ostringstream o1, o2;
  write_request_stream(o1, s1);
  write_request_stream(o2, s2);
  EXPECT_EQ(o1.str(), o2.str());
  EXPECT_NO_THROW(s1.validate(4));
  for (std::size_t k = 1; k < s1.size(); ++k) EXPECT_LE(s1.requests[k - 1].time_s, s1.requests[k].time_s);
}

TEST(Generate, UnknownProfileRejected) {
  EXPECT_THROW(make_profile("rush-hour", small_config(2, 2), {}), std::invalid_argument);
}

TEST(Generate, CustomMatrixRates) {
  const auto c = small_config(2, 3);
  ProfileParams p;
  p.custom_rates = {0.0, 1.0, 2.0, 0.0};
  const auto profile = make_profile("custom-matrix", c, p);
  EXPECT_EQ(profile.rate(2, 1, 0), 2.0);
  p.custom_rates = {1.0, 2.0, 3.0};
  EXPECT_THROW(make_profile("custom-matrix", c, p), std::invalid_argument);
}

TEST(StreamIo, RoundTrip) {
  RequestStream s;
  s.requests = {Request{0, 1, 0, 12.5, 1}, Request{1, 0, 1, 299.75, 2}};
  std::ostringstream out;
  write_request_stream(out, s);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "id,origin,dest,time_s,riders");
  std::istringstream in(out.str());
  const auto back = read_request_stream(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.requests[1].time_s, 299.75);
  EXPECT_EQ(back.requests[1].riders, 2);
}

TEST(Aggregate, EmptyStreamIsZero) {
  const auto c = small_config(2, 3);
  const auto d = aggregate_zone_demand(RequestStream{}, c, 3);
  for (double v : d.values) EXPECT_EQ(v, 0.0);
}

TEST(Aggregate, ThreeRidersOverRideshare) {
  const auto c = small_config(2, 3);
  RequestStream s;
  for (int k = 0; k < 3; ++k) s.requests.push_back(req(0, 1, 300.0 + 10 * k));
  const auto d = aggregate_zone_demand(s, c, 3);
  EXPECT_EQ(d.at(0, 1), 2.0);  // 3 / 1.5
  EXPECT_EQ(d.at(0, 0), 0.0);
  EXPECT_EQ(d.at(0, 2), 0.0);
  EXPECT_EQ(d.at(1, 1), 0.0);
}

TEST(Aggregate, HalfUpOnVehicleEquivalents) {
  auto c = small_config(1, 1);
  c.rideshare = 2.0;
  RequestStream s;
  s.requests = {req(0, 0, 1.0, 2), req(0, 0, 2.0, 1)};  // 3 riders -> 1.5 -> 2
  EXPECT_EQ(aggregate_zone_demand(s, c, 1).at(0, 0), 2.0);
}

TEST(Disaggregate, Examples) {
  ZoneEpochTable d(2, 1);
  DestinationDistribution mu{2, {0.8, 0.2, 0.5, 0.5}};
  d.at(0, 0) = 10;
  d.at(1, 0) = 5;
  const auto t = disaggregate(d, mu);
  EXPECT_EQ(t.at(0, 0, 0), 8);
  EXPECT_EQ(t.at(0, 1, 0), 2);
  EXPECT_EQ(t.at(1, 0, 0), 3);
  EXPECT_EQ(t.at(1, 1, 0), 3);
  ZoneEpochTable zero(2, 1);
  const auto z = disaggregate(zero, mu);
  for (int v : z.values) EXPECT_EQ(v, 0);
}

TEST(Disaggregate, RowSumWithinRoundingSlack) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int zones = static_cast<int>(rng.uniform_int(1, 6));
    DestinationDistribution mu;
    mu.zones = zones;
    for (int i = 0; i < zones; ++i) {
      std::vector<double> w(zones);
      double sum = 0;
      for (auto& x : w) sum += (x = rng.uniform());
      for (double x : w) mu.probs.push_back(x / sum);
    }
    ZoneEpochTable d(zones, 2);
    for (auto& v : d.values) v = static_cast<double>(rng.uniform_int(0, 30));
    const auto t = disaggregate(d, mu);
    for (int i = 0; i < zones; ++i)
      for (int e = 0; e < 2; ++e) EXPECT_LE(std::abs(t.origin_total(i, e) - d.at(i, e)), zones / 2.0 + 1e-9);
  }
}

TEST(Destinations, LaplaceSmoothedFrequencies) {
  RequestStream s;
  s.requests = {req(0, 1, 0), req(0, 1, 1), req(0, 0, 2)};
  const auto mu = estimate_destination_distribution({s}, 2);
  EXPECT_NO_THROW(mu.validate());
  EXPECT_NEAR(mu.at(0, 0), 2.0 / 5.0, 1e-12);
  EXPECT_NEAR(mu.at(0, 1), 3.0 / 5.0, 1e-12);
  EXPECT_NEAR(mu.at(1, 0), 0.5, 1e-12);
}

TEST(Perturb, FivePercentOfHundred) {
  RequestStream s;
  for (int k = 0; k < 100; ++k) s.requests.push_back(req(k % 3, (k + 1) % 3, k * 10.0));
  Rng rng(4);
  const auto up = perturb_stream(s, 5.0, 300, rng);
  EXPECT_EQ(up.size(), 105u);
  const auto down = perturb_stream(s, -5.0, 300, rng);
  EXPECT_EQ(down.size(), 95u);
  for (std::size_t k = 1; k < up.size(); ++k) EXPECT_LE(up.requests[k - 1].time_s, up.requests[k].time_s);
}

TEST(Forecast, ProfileForecastHasHorizonShape) {
  const auto c = small_config(4, 8);
  const auto profile = make_profile("hub-and-spoke", c, {});
  const auto d = forecast_from_profile(profile, c, 6, 4);
  EXPECT_EQ(d.epochs, 4);
  // Epochs past the episode carry no demand.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(d.at(i, j, 2), 0);
      EXPECT_EQ(d.at(i, j, 3), 0);
      EXPECT_GE(d.at(i, j, 0), 0);
    }
}

TEST(Smape, Basics) {
  EXPECT_EQ(smape({0, 0}, {0, 0}), 0.0);
  EXPECT_NEAR(smape({1}, {3}), 100.0, 1e-12);
  EXPECT_THROW(smape({1}, {}), std::invalid_argument);
}
