#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "ridemp/forecaster.hpp"

using namespace ridemp;

namespace {

ForecastOptions small_options() {
  ForecastOptions o;
  o.recent_epochs = 4;
  o.horizon = 3;
  o.network = MlpOptions{{32, 32}, Activation::kRelu, 3e-3, 32, 60, 1e-6, 3};
  return o;
}

std::vector<ZoneEpochTable> days(int count, int zones, int epochs, const std::function<double(int, int, int)>& f) {
  std::vector<ZoneEpochTable> out;
  for (int d = 0; d < count; ++d) {
    ZoneEpochTable t(zones, epochs);
    for (int i = 0; i < zones; ++i)
      for (int e = 0; e < epochs; ++e) t.at(i, e) = f(d, i, e);
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(Forecaster, NeedsTwoWeeks) {
  const auto h = days(10, 2, 12, [](int, int, int) { return 1.0; });
  EXPECT_THROW(train_forecaster(h, small_options()), std::invalid_argument);
}

TEST(Forecaster, ZeroHistoryPredictsZero) {
  const auto h = days(14, 2, 12, [](int, int, int) { return 0.0; });
  const auto m = train_forecaster(h, small_options());
  const auto f = m.forecast(window(h.back(), 2, 4), window(h.back(), 6, 3));
  for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(Forecaster, ConstantSignalIsLearned) {
  const double rate[3] = {5.0, 12.0, 8.0};
  const auto h = days(21, 3, 16, [&](int, int i, int) { return rate[i]; });
  const auto o = small_options();
  const auto m = train_forecaster(std::vector<ZoneEpochTable>(h.begin(), h.begin() + 18), o);
  for (int d = 18; d < 21; ++d) {
    const auto f = m.forecast(window(h[d], 4, o.recent_epochs), window(h[d - 7], 8, o.horizon));
    ASSERT_EQ(f.zones, 3);
    ASSERT_EQ(f.epochs, o.horizon);
    for (int i = 0; i < 3; ++i)
      for (int t = 0; t < o.horizon; ++t) EXPECT_NEAR(f.at(i, t), rate[i], 0.2 * rate[i]);
  }
}

TEST(Forecaster, TrainingLossDecreases) {
  const auto h = days(14, 2, 12, [](int d, int i, int e) { return 3.0 + i + 2.0 * std::sin(e + d); });
  const auto m = train_forecaster(h, small_options());
  const auto& log = m.training_log();
  ASSERT_GE(log.size(), 2u);
  EXPECT_LT(log.back().train_loss, log.front().train_loss);
}

TEST(Forecaster, PeriodicPatternBeatsNaiveBaseline) {
  // Within-day wave plus a weekday effect; the last epoch alone cannot see the wave turn.
  auto signal = [](int d, int i, int e) {
    const double weekday = 1.0 + 0.5 * ((d % 7) < 5 ? 1.0 : 0.0);
    return std::round(weekday * (6.0 + 2.0 * i + 5.0 * std::sin(0.8 * e)) + 6.0);
  };
  const int epochs = 20;
  const auto h = days(28, 2, epochs, signal);
  const auto o = small_options();
  const auto m = train_forecaster(std::vector<ZoneEpochTable>(h.begin(), h.begin() + 21), o);
  std::vector<double> actual, model, naive;
  for (int d = 21; d < 28; ++d)
    for (int e = o.recent_epochs; e + o.horizon <= epochs; ++e) {
      const auto recent = window(h[d], e - o.recent_epochs, o.recent_epochs);
      const auto f = m.forecast(recent, window(h[d - 7], e, o.horizon));
      const auto n = naive_last_epoch_forecast(recent, o.horizon);
      const auto target = window(h[d], e, o.horizon);
      for (std::size_t k = 0; k < target.values.size(); ++k) {
        actual.push_back(target.values[k]);
        model.push_back(f.values[k]);
        naive.push_back(n.values[k]);
        ASSERT_GE(f.values[k], 0.0);
      }
    }
  EXPECT_LT(smape(actual, model), smape(actual, naive));
}
