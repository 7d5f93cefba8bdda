#pragma once

#include "ftstop/arima.hpp"
#include "ftstop/fpca.hpp"

#include <optional>

namespace ftstop {

/// How the score series are modelled.
struct ScoreModelSpec {
  /// Fixed order instead of the automatic search.
  std::optional<ArimaOrder> order;
  bool drift = false;
  AutoArimaOptions search;
};

struct FtsOptions {
  KernelType kernel = KernelType::bartlett;
  /// Fixed long-run bandwidth; plug-in estimate when empty.
  std::optional<double> bandwidth;
  /// Fixed number of components; eigenvalue-ratio choice when empty.
  std::optional<Eigen::Index> components;
  ScoreModelSpec scores;
};

/// Dynamic FPCA plus one ARIMA model per retained score series.
struct FtsModel {
  FpcaModel fpca;
  std::vector<ArimaModel> score_models;
  Eigen::Index training_length = 0;
  double bandwidth = 1.0;
};

/// Score model for one component. Series shorter than 10 points (or failed searches) fall back
/// to ARIMA(0,1,0), i.e. the last-value forecast.
ArimaModel fit_score_model(std::span<const double> series, const ScoreModelSpec& spec = {});

FtsModel fit_fts(const FunctionalTimeSeries& fts, const FtsOptions& options = {});

/// h-step-ahead score forecasts, one per retained component.
Vector forecast_scores(const FtsModel& model, int h);

/// mean + sum_k scores(k) * phi_k
Vector curve_from_scores(const FpcaModel& fpca, const Vector& scores);

Vector forecast_curve(const FtsModel& model, int h);

}  // namespace ftstop
