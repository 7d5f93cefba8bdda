#include "ftstop/fts_model.hpp"

#include <stdexcept>

namespace ftstop {

namespace {

ArimaModel random_walk(std::span<const double> series) {
  return evaluate_arima(series, {0, 1, 0}, false, {}, {}, 0.0);
}

}  // namespace

ArimaModel fit_score_model(std::span<const double> series, const ScoreModelSpec& spec) {
  if (series.size() < 2) {
    throw std::invalid_argument("score series needs at least 2 observations");
  }
  if (spec.order) {
    try {
      return fit_arima(series, *spec.order, spec.drift);
    } catch (const std::exception&) {
      const int d = std::min(spec.order->d, static_cast<int>(series.size()) - 1);
      return evaluate_arima(series, {0, d, 0}, false, {}, {}, 0.0);
    }
  }
  if (series.size() < 10) {
    return random_walk(series);
  }
  try {
    return auto_arima(series, spec.search);
  } catch (const std::exception&) {
    return random_walk(series);
  }
}

FtsModel fit_fts(const FunctionalTimeSeries& fts, const FtsOptions& options) {
  const Eigen::Index n = fts.size();
  if (n < 3) {
    throw std::invalid_argument("insufficient training curves");
  }
  const WhitenedSample sample = whiten(fts);
  KernelSpec kernel{options.kernel, 1.0, options.kernel == KernelType::bartlett ? 1 : 2};
  if (options.bandwidth) {
    kernel.bandwidth = *options.bandwidth;
  } else if (n >= 4) {
    kernel.bandwidth = plugin_bandwidth(sample, n, kernel);
  }

  FtsModel model;
  model.training_length = n;
  model.bandwidth = kernel.bandwidth;
  std::optional<Eigen::Index> k = options.components;
  if (k) k = std::min<Eigen::Index>(*k, std::min(n, fts.grid_size()));
  model.fpca = dynamic_fpca(fts, sample, kernel, k);

  model.score_models.reserve(static_cast<std::size_t>(model.fpca.components));
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < model.fpca.components; ++c) {
    for (Eigen::Index t = 0; t < n; ++t) column[t] = model.fpca.scores(t, c);
    model.score_models.push_back(fit_score_model(column, options.scores));
  }
  return model;
}

Vector forecast_scores(const FtsModel& model, int h) {
  Vector out(static_cast<Eigen::Index>(model.score_models.size()));
  for (std::size_t k = 0; k < model.score_models.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = forecast(model.score_models[k], h).back();
  }
  return out;
}

Vector curve_from_scores(const FpcaModel& fpca, const Vector& scores) {
  if (scores.size() != fpca.components) {
    throw std::invalid_argument("score vector length does not match component count");
  }
  Vector curve = fpca.mean;
  curve.noalias() += fpca.eigenfunctions.transpose() * scores;
  return curve;
}

Vector forecast_curve(const FtsModel& model, int h) {
  return curve_from_scores(model.fpca, forecast_scores(model, h));
}

}  // namespace ftstop
