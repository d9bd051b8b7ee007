#include "ridemp/forecaster.hpp"

#include <algorithm>
#include <stdexcept>

namespace ridemp {

ZoneEpochTable window(const ZoneEpochTable& day, int first_epoch, int length) {
  ZoneEpochTable out(day.zones, length);
  for (int i = 0; i < day.zones; ++i)
    for (int t = 0; t < length; ++t) {
      const int e = first_epoch + t;
      out.at(i, t) = (e >= 0 && e < day.epochs) ? day.at(i, e) : 0.0;
    }
  return out;
}

ZoneEpochTable naive_last_epoch_forecast(const ZoneEpochTable& recent, int horizon) {
  ZoneEpochTable out(recent.zones, horizon);
  for (int i = 0; i < recent.zones; ++i)
    for (int t = 0; t < horizon; ++t) out.at(i, t) = recent.epochs > 0 ? recent.at(i, recent.epochs - 1) : 0.0;
  return out;
}

std::vector<double> ForecastModel::features(const ZoneEpochTable& recent, const ZoneEpochTable& week_ago,
                                            int zone) const {
  std::vector<double> f;
  const double norm = scale_ > 0 ? scale_ : 1.0;
  for (int t = 0; t < options_.recent_epochs; ++t) f.push_back(recent.at(zone, t) / norm);
  for (int t = 0; t < options_.horizon; ++t) f.push_back(week_ago.at(zone, t) / norm);
  for (int z = 0; z < zones_; ++z) f.push_back(z == zone ? 1.0 : 0.0);
  return f;
}

ZoneEpochTable ForecastModel::forecast(const ZoneEpochTable& recent, const ZoneEpochTable& week_ago) const {
  if (!network_) throw std::logic_error("forecast: model is not trained");
  if (recent.zones != zones_ || week_ago.zones != zones_ || recent.epochs != options_.recent_epochs ||
      week_ago.epochs != options_.horizon) {
    throw std::invalid_argument("forecast: window shape mismatch");
  }
  ZoneEpochTable out(zones_, options_.horizon);
  if (scale_ <= 0) return out;
  Matrix x(zones_, network_->input_dim());
  for (int i = 0; i < zones_; ++i) {
    const auto f = features(recent, week_ago, i);
    for (std::size_t c = 0; c < f.size(); ++c) x(i, static_cast<Eigen::Index>(c)) = f[c];
  }
  const Matrix y = network_->predict(x);
  for (int i = 0; i < zones_; ++i)
    for (int t = 0; t < options_.horizon; ++t) out.at(i, t) = std::max(0.0, y(i, t) * scale_);
  return out;
}

ForecastModel train_forecaster(const std::vector<ZoneEpochTable>& history, const ForecastOptions& options) {
  const int week = options.days_per_week;
  if (static_cast<int>(history.size()) < 2 * week) {
    throw std::invalid_argument("train_forecaster: need at least two weeks of history");
  }
  const int zones = history.front().zones;
  const int epochs = history.front().epochs;
  for (const auto& day : history) {
    if (day.zones != zones || day.epochs != epochs) throw std::invalid_argument("train_forecaster: ragged history");
  }
  const int k = options.recent_epochs, h = options.horizon;
  if (epochs < k + h) throw std::invalid_argument("train_forecaster: day shorter than window + horizon");

  ForecastModel model;
  model.zones_ = zones;
  model.options_ = options;
  for (const auto& day : history)
    for (double v : day.values) model.scale_ = std::max(model.scale_, v);

  std::vector<std::vector<double>> xs, ys;
  for (std::size_t d = week; d < history.size(); ++d) {
    for (int e = k; e + h <= epochs; ++e) {
      const auto recent = window(history[d], e - k, k);
      const auto past = window(history[d - week], e, h);
      const auto target = window(history[d], e, h);
      for (int i = 0; i < zones; ++i) {
        xs.push_back(model.features(recent, past, i));
        std::vector<double> y;
        for (int t = 0; t < h; ++t) y.push_back(model.scale_ > 0 ? target.at(i, t) / model.scale_ : 0.0);
        ys.push_back(std::move(y));
      }
    }
  }
  Matrix x(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.front().size()));
  Matrix y(static_cast<Eigen::Index>(ys.size()), h);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    for (std::size_t c = 0; c < xs[r].size(); ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = xs[r][c];
    for (int c = 0; c < h; ++c) y(static_cast<Eigen::Index>(r), c) = ys[r][static_cast<std::size_t>(c)];
  }
  model.network_ = std::make_shared<Mlp>(static_cast<int>(x.cols()), h, options.network);
  model.log_ = model.network_->fit(x, y);
  return model;
}

ForecastModel train_forecaster(const std::vector<RequestStream>& day_streams, const ScenarioConfig& config,
                               const ForecastOptions& options) {
  std::vector<ZoneEpochTable> history;
  for (const auto& s : day_streams) history.push_back(aggregate_zone_demand(s, config, config.episode_epochs));
  return train_forecaster(history, options);
}

}  // namespace ridemp
