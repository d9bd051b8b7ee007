#pragma once

#include <memory>
#include <vector>

#include "ridemp/demand.hpp"
#include "ridemp/learner.hpp"

namespace ridemp {

struct ForecastOptions {
  int recent_epochs = 6;  // k
  int horizon = 4;        // epochs predicted per call
  int days_per_week = 7;
  MlpOptions network{{64, 64}, Activation::kRelu, 1e-3, 32, 80, 1e-5, 0};
};

// Zone-level demand forecaster. One network shared by all zones; each sample
// is (last k epochs of the zone, the same target epochs one week earlier,
// zone one-hot) -> next `horizon` epochs.
class ForecastModel {
 public:
  int zones() const { return zones_; }
  const ForecastOptions& options() const { return options_; }
  const std::vector<EpochLog>& training_log() const { return log_; }

  // recent: zones x k (oldest first); week_ago: zones x horizon. Returns
  // zones x horizon predictions, clamped at zero.
  ZoneEpochTable forecast(const ZoneEpochTable& recent, const ZoneEpochTable& week_ago) const;

 private:
  friend ForecastModel train_forecaster(const std::vector<ZoneEpochTable>&, const ForecastOptions&);
  std::vector<double> features(const ZoneEpochTable& recent, const ZoneEpochTable& week_ago, int zone) const;

  int zones_ = 0;
  double scale_ = 0.0;  // largest training count; zero history gives zero forecasts
  ForecastOptions options_;
  std::shared_ptr<Mlp> network_;
  std::vector<EpochLog> log_;
};

// history: one zone-by-epoch count table per day, oldest first; at least two
// weeks are required for the week-ago feature.
ForecastModel train_forecaster(const std::vector<ZoneEpochTable>& history, const ForecastOptions& options);
ForecastModel train_forecaster(const std::vector<RequestStream>& day_streams, const ScenarioConfig& config,
                               const ForecastOptions& options);

// Slices used by both training and evaluation.
ZoneEpochTable window(const ZoneEpochTable& day, int first_epoch, int length);

// Baseline: repeat each zone's most recent epoch across the horizon.
ZoneEpochTable naive_last_epoch_forecast(const ZoneEpochTable& recent, int horizon);

}  // namespace ridemp
