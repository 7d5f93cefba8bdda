#pragma once

#include "ftstop/detector.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace ftstop {

struct BootstrapConfig {
  int replications = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Refit the functional model on resampled training curves inside every replication.
  bool deep = false;
  /// Abort when more than this fraction of replications fail.
  double max_failure_fraction = 0.1;
};

/// Independent generator for replication `stream` of a run seeded with `seed`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream);

/// Everything a replication needs for one expanding window.
struct BootstrapWindow {
  Eigen::Index target = 0;  // 0-based position of the holdout curve
  long holdout_index = 0;   // 1-based
  FpcaModel fpca;           // basis and scores of the window's fit
  Vector point_scores;      // one-step score forecasts
  /// Per component: one-step forecast errors of the score model on every prefix.
  std::vector<std::vector<double>> score_errors;
  /// Residual curves available for resampling (rows).
  Matrix residual_pool;
};

/// One-step forecast errors beta_t - beta_{t|t-1} for t = 2..gamma, refitting the score
/// model on every prefix (prefixes shorter than 3 use the last value).
std::vector<std::vector<double>> bootstrap_forecast_errors(const Matrix& scores,
                                                           Eigen::Index gamma,
                                                           const ScoreModelSpec& spec = {});

/// Point forecast plus resampled score errors and a resampled residual curve.
Vector bootstrap_curve(const BootstrapWindow& window, std::mt19937_64& rng);

struct BootstrapPlan {
  std::vector<BootstrapWindow> windows;
  StoppingTimeReport point;
};

/// Fits every expanding window once and builds its resampling pools.
BootstrapPlan prepare_bootstrap(const FunctionalTimeSeries& fts,
                                const DetectorOptions& options = {});

struct StoppingTimeDistribution {
  std::vector<long> samples;
  std::map<long, long> frequency;
  long mode = 0;
  /// Values sharing the maximal count (mode is the smallest).
  std::vector<long> mode_ties;
  int failures = 0;
  int replications = 0;
};

StoppingTimeDistribution summarize_stopping_times(std::vector<long> samples, int failures,
                                                  int replications);

/// Resamples the plan's pools B times and re-runs break detection on each replicate's errors.
StoppingTimeDistribution resample_stopping_times(const FunctionalTimeSeries& fts,
                                                 const BootstrapPlan& plan,
                                                 const BootstrapConfig& config,
                                                 const DetectorOptions& options = {});

struct BootstrapResult {
  BootstrapPlan plan;
  StoppingTimeDistribution distribution;
};

BootstrapResult bootstrap_stopping_distribution(const FunctionalTimeSeries& fts,
                                                const BootstrapConfig& config,
                                                const DetectorOptions& options = {});

/// Linear-interpolation quantile of the sorted samples (prob in [0, 1]).
double sample_quantile(std::vector<long> samples, double prob);

}  // namespace ftstop
