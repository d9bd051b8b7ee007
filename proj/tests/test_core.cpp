#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ridemp/core.hpp"
#include "ridemp/kv_document.hpp"
#include "ridemp/rng.hpp"

using namespace ridemp;

TEST(TravelMatrix, SingleZone) {
  const std::vector<Point> layout{{0, 0}};
  const auto m = build_travel_matrix(layout, 300);
  ASSERT_EQ(m.zones, 1);
  EXPECT_EQ(m.eta(0, 0), 0.0);
  EXPECT_EQ(m.lambda(0, 0), 1);
}

TEST(TravelMatrix, TwoZonesSixHundredSeconds) {
  const std::vector<Point> layout{{0, 0}, {600, 0}};
  const auto m = build_travel_matrix(layout, 300);
  EXPECT_EQ(m.lambda(0, 1), 2);
  EXPECT_EQ(m.lambda(1, 0), 2);
}

TEST(TravelMatrix, ThreeZonesOnALine) {
  const std::vector<Point> layout{{0, 0}, {400, 0}, {800, 0}};
  const auto m = build_travel_matrix(layout, 300);
  const int expected[3][3] = {{1, 2, 3}, {2, 1, 2}, {3, 2, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      // Oracle: ceil of the line distance over the epoch, one on the diagonal.
      const double d = std::abs(400.0 * (i - j));
      const int lam = i == j ? 1 : static_cast<int>(std::ceil(d / 300.0));
      EXPECT_EQ(lam, expected[i][j]);
      EXPECT_EQ(m.lambda(i, j), expected[i][j]) << i << "," << j;
    }
}

TEST(TravelMatrix, GridIsSymmetricWithZeroDiagonal) {
  ScenarioConfig c;
  c.zone_count = 7;
  c.grid_columns = 3;
  const auto m = build_travel_matrix(c);
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(m.eta(i, i), 0.0);
    EXPECT_EQ(m.lambda(i, i), 1);
    for (int j = 0; j < 7; ++j) {
      EXPECT_EQ(m.eta(i, j), m.eta(j, i));
      if (i != j) EXPECT_GE(m.lambda(i, j), 1);
      for (int k = 0; k < 7; ++k) EXPECT_LE(m.lambda(i, k), m.lambda(i, j) + m.lambda(j, k) + 1);
    }
  }
}

TEST(TravelMatrix, RejectsNonFiniteCoordinates) {
  const std::vector<Point> layout{{0, 0}, {NAN, 0}};
  EXPECT_THROW(build_travel_matrix(layout, 300), std::invalid_argument);
}

TEST(Weights, ServiceWeightExamples) {
  ScenarioConfig c;
  EXPECT_DOUBLE_EQ(weight_qp(1, 1, c), 0.5);
  EXPECT_DOUBLE_EQ(weight_qp(1, 2, c), 0.375);
  EXPECT_DOUBLE_EQ(weight_qp(2, 2, c), 0.25);
}

TEST(Weights, ServiceWeightOutsideWindowThrows) {
  ScenarioConfig c;
  c.horizon = 4;
  c.patience = 2;
  EXPECT_THROW(weight_qp(1, 3, c), std::out_of_range);
  EXPECT_THROW(weight_qp(2, 1, c), std::out_of_range);
  EXPECT_THROW(weight_qp(4, 5, c), std::out_of_range);
}

TEST(Weights, ServingEarlierAlwaysWeighsMore) {
  ScenarioConfig c;
  c.horizon = 6;
  c.patience = 3;
  for (int t = 1; t <= c.horizon; ++t)
    for (int rho = t; rho <= std::min(c.horizon, t + c.patience - 1); ++rho) {
      if (rho + 1 <= std::min(c.horizon, t + c.patience - 1)) EXPECT_GT(weight_qp(t, rho, c), weight_qp(t, rho + 1, c));
      if (t + 1 <= c.horizon && rho + 1 <= std::min(c.horizon, t + c.patience)) {
        EXPECT_GT(weight_qp(t, rho, c), weight_qp(t + 1, rho + 1, c));
      }
    }
}

TEST(Weights, RelocationWeightExamples) {
  ScenarioConfig c;
  const std::vector<Point> layout{{0, 0}, {600, 0}};
  const auto m = build_travel_matrix(layout, 300);
  EXPECT_EQ(weight_qr(0, 0, 1, c, m), 0.0);
  EXPECT_NEAR(weight_qr(0, 1, 1, c, m), 0.3, 1e-12);
  EXPECT_NEAR(weight_qr(0, 1, 2, c, m), 0.15, 1e-12);
}

TEST(Weights, PickupWindowSize) {
  for (int horizon = 1; horizon <= 6; ++horizon)
    for (int s = 1; s <= horizon; ++s)
      for (int t = 1; t <= horizon; ++t) {
        int count = 0;
        for (int rho = t; rho <= t + s - 1; ++rho) count += rho <= horizon ? 1 : 0;
        EXPECT_EQ(pickup_window_size(t, horizon, s), count);
        EXPECT_EQ(pickup_window_size(t, horizon, s), std::min(s, horizon - t + 1));
      }
}

TEST(Rounding, HalfUp) {
  EXPECT_EQ(round_half_up(1.5), 2);
  EXPECT_EQ(round_half_up(2.5), 3);
  EXPECT_EQ(round_half_up(2.4999), 2);
  EXPECT_EQ(round_half_up(0.0), 0);
  EXPECT_EQ(round_half_up(5 * 0.1 * 3), 2);
}

TEST(Config, DefaultsValidate) {
  ScenarioConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.effective_big_m(), c.fleet_size);
}

TEST(Config, InvariantsRejected) {
  auto bad = [](auto edit) {
    ScenarioConfig c;
    edit(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
  };
  bad([](ScenarioConfig& c) { c.patience = c.horizon + 1; });
  bad([](ScenarioConfig& c) { c.multipliers = {0.75, 0.0}; });
  bad([](ScenarioConfig& c) { c.multipliers = {1.0, 0.25}; });
  bad([](ScenarioConfig& c) { c.multipliers = {1.0, 0.5, 0.5, 0.0}; });
  bad([](ScenarioConfig& c) { c.router_batch_seconds = 70; });
  bad([](ScenarioConfig& c) { c.zone_count = 0; });
  bad([](ScenarioConfig& c) { c.fleet_size = 0; });
}

TEST(Config, KvRoundTrip) {
  ScenarioConfig c;
  c.zone_count = 4;
  c.grid_columns = 2;
  c.multipliers = {1.0, 0.6, 0.0};
  c.rng_seed = 0xFFFFFFFFFFFFFFFFull;
  c.rideshare = 1.25;
  const auto text = c.to_kv().to_string();
  const auto back = ScenarioConfig::from_kv(KvDocument::parse_string(text));
  EXPECT_EQ(back.to_kv().to_string(), text);
  EXPECT_EQ(back.rng_seed, c.rng_seed);
  EXPECT_EQ(back.multipliers, c.multipliers);
}

TEST(Config, KvRejectsUnknownKeyAndSchema) {
  auto doc = ScenarioConfig{}.to_kv();
  doc.set("surprise", 1);
  EXPECT_ANY_THROW(ScenarioConfig::from_kv(doc));
  auto doc2 = ScenarioConfig{}.to_kv();
  doc2.set("schema_version", 99);
  EXPECT_ANY_THROW(ScenarioConfig::from_kv(doc2));
}

TEST(Kv, ParsesCommentsAndArrays) {
  const auto doc = KvDocument::parse_string("# note\na = 1\nb = 0.5 0.25\n\nname = hub\n");
  EXPECT_EQ(doc.get_int("a"), 1);
  EXPECT_EQ(doc.get_doubles("b"), (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(doc.get_string("name"), "hub");
  EXPECT_THROW(doc.get_int("missing"), FormatError);
}

TEST(Kv, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SubstreamsAreIndependentOfParentState) {
  Rng a(7);
  const auto s1 = a.substream("demand");
  a.next_u64();
  const auto s2 = a.substream("demand");
  Rng x = s1, y = s2;
  for (int i = 0; i < 10; ++i) EXPECT_EQ(x.next_u64(), y.next_u64());
  Rng p = a.substream("perturbation"), q = a.substream("demand");
  EXPECT_NE(p.next_u64(), q.next_u64());
}

TEST(Rng, UniformIntCoversRange) {
  Rng r(3);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Rng, PoissonMean) {
  Rng r(11);
  for (double mean : {0.5, 4.0, 40.0}) {
    const int n = 20000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += r.poisson(mean);
    EXPECT_NEAR(sum / n, mean, 4 * std::sqrt(mean / n));
  }
}

TEST(Rng, BinomialMean) {
  Rng r(5);
  for (std::int64_t n : {10, 1000}) {
    const int draws = 5000;
    double sum = 0;
    for (int i = 0; i < draws; ++i) {
      const auto x = r.binomial(n, 0.3);
      ASSERT_GE(x, 0);
      ASSERT_LE(x, n);
      sum += static_cast<double>(x);
    }
    const double sd = std::sqrt(n * 0.3 * 0.7 / draws);
    EXPECT_NEAR(sum / draws, n * 0.3, 4 * sd);
  }
}

TEST(Rng, GammaMeanAndVariance) {
  Rng r(9);
  for (double shape : {0.5, 3.0, 200.0}) {
    const int n = 20000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double x = r.gamma(shape);
      ASSERT_GT(x, 0.0);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n, var = sq / n - mean * mean;
    EXPECT_NEAR(mean, shape, 5 * std::sqrt(shape / n));
    EXPECT_NEAR(var / shape, 1.0, 0.1);
  }
}

TEST(Rng, BinomialLargeCountVariance) {
  Rng r(13);
  const std::int64_t n = 1'000'000'000;
  const int draws = 4000;
  double sum = 0, sq = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = static_cast<double>(r.binomial(n, 0.25));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / draws, var = sq / draws - mean * mean;
  const double true_var = n * 0.25 * 0.75;
  EXPECT_NEAR(mean, n * 0.25, 5 * std::sqrt(true_var / draws));
  EXPECT_NEAR(var / true_var, 1.0, 0.1);
}
