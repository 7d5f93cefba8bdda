#include "ftstop/bootstrap.hpp"

#include "ftstop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftstop {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

std::vector<std::vector<double>> bootstrap_forecast_errors(const Matrix& scores,
                                                           Eigen::Index gamma,
                                                           const ScoreModelSpec& spec) {
  if (gamma < 3) {
    throw std::invalid_argument("bootstrap_forecast_errors needs gamma >= 3");
  }
  if (gamma > scores.rows()) {
    throw std::invalid_argument("bootstrap_forecast_errors: gamma exceeds score length");
  }
  std::vector<std::vector<double>> pools(static_cast<std::size_t>(scores.cols()));
  std::vector<double> column;
  for (Eigen::Index k = 0; k < scores.cols(); ++k) {
    auto& pool = pools[static_cast<std::size_t>(k)];
    pool.reserve(static_cast<std::size_t>(gamma - 1));
    column.resize(static_cast<std::size_t>(gamma));
    for (Eigen::Index t = 0; t < gamma; ++t) column[t] = scores(t, k);
    for (Eigen::Index t = 1; t < gamma; ++t) {
      // forecast of column[t] from column[0..t)
      double predicted = column[t - 1];
      if (t >= 3) {
        const ArimaModel m =
            fit_score_model(std::span<const double>(column.data(), static_cast<std::size_t>(t)),
                            spec);
        predicted = forecast(m, 1).front();
      }
      pool.push_back(column[t] - predicted);
    }
  }
  return pools;
}

namespace {

template <typename T>
std::size_t draw_index(const T& container_size, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(container_size) - 1);
  return pick(rng);
}

}  // namespace

Vector bootstrap_curve(const BootstrapWindow& window, std::mt19937_64& rng) {
  const Eigen::Index k_count = window.point_scores.size();
  Vector scores = window.point_scores;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto& pool = window.score_errors[static_cast<std::size_t>(k)];
    if (pool.empty()) {
      throw std::invalid_argument("bootstrap_curve: empty score error pool");
    }
    scores(k) += pool[draw_index(pool.size(), rng)];
  }
  if (window.residual_pool.rows() == 0) {
    throw std::invalid_argument("bootstrap_curve: empty residual pool");
  }
  const Eigen::Index r = static_cast<Eigen::Index>(draw_index(window.residual_pool.rows(), rng));
  Vector curve = curve_from_scores(window.fpca, scores);
  curve += window.residual_pool.row(r).transpose();
  return curve;
}

BootstrapPlan prepare_bootstrap(const FunctionalTimeSeries& fts, const DetectorOptions& options) {
  const Eigen::Index n = fts.size();
  if (n < 5) {
    throw std::invalid_argument("bootstrap needs at least 5 curves");
  }
  const std::size_t count = static_cast<std::size_t>(n - kFirstWindow);
  BootstrapPlan plan;
  plan.windows.resize(count);
  IsfeSeries& isfe = plan.point.isfe;
  isfe.errors.resize(count);
  isfe.holdout_index.resize(count);
  isfe.components.resize(count);

  parallel_for(count, options.threads, [&](std::size_t i) {
    const Eigen::Index target = kFirstWindow + static_cast<Eigen::Index>(i);
    const auto [first, len] = training_window(target, options);
    BootstrapWindow& w = plan.windows[i];
    try {
      const FtsModel model = fit_fts(fts.slice(first, len), options.model);
      w.target = target;
      w.holdout_index = static_cast<long>(target + 1);
      w.fpca = model.fpca;
      w.point_scores = forecast_scores(model, 1);
      w.score_errors = bootstrap_forecast_errors(model.fpca.scores, len, options.model.scores);
      w.residual_pool = model.fpca.residuals.topRows(len - 1);

      const Vector fc = curve_from_scores(w.fpca, w.point_scores);
      const Vector diff = fts.curve(target).transpose() - fc;
      isfe.errors[i] = squared_norm(diff, fts.grid());
      isfe.holdout_index[i] = w.holdout_index;
      isfe.components[i] = model.fpca.components;
    } catch (const std::exception& e) {
      throw WindowError(static_cast<long>(target), e.what());
    }
  });
  plan.point.breakpoint = detect_breakpoint(isfe, options.min_segment);
  return plan;
}

StoppingTimeDistribution summarize_stopping_times(std::vector<long> samples, int failures,
                                                  int replications) {
  StoppingTimeDistribution out;
  out.samples = std::move(samples);
  out.failures = failures;
  out.replications = replications;
  for (long s : out.samples) ++out.frequency[s];
  long best = -1;
  for (const auto& [value, count] : out.frequency) {
    if (count > best) {
      best = count;
      out.mode = value;
    }
  }
  for (const auto& [value, count] : out.frequency) {
    if (count == best) out.mode_ties.push_back(value);
  }
  return out;
}

StoppingTimeDistribution resample_stopping_times(const FunctionalTimeSeries& fts,
                                                 const BootstrapPlan& plan,
                                                 const BootstrapConfig& config,
                                                 const DetectorOptions& options) {
  if (config.replications < 1) {
    throw std::invalid_argument("bootstrap needs B >= 1");
  }
  const std::size_t b_count = static_cast<std::size_t>(config.replications);
  std::vector<long> results(b_count, 0);
  std::vector<char> failed(b_count, 0);

  parallel_for(b_count, config.threads, [&](std::size_t b) {
    std::mt19937_64 rng = substream(config.seed, b);
    IsfeSeries isfe;
    isfe.errors.reserve(plan.windows.size());
    try {
      for (const BootstrapWindow& w : plan.windows) {
        Vector fc;
        if (config.deep) {
          const auto [first, len] = training_window(w.target, options);
          Matrix resampled(len, fts.grid_size());
          for (Eigen::Index t = 0; t < len; ++t) {
            Vector s = w.fpca.scores.row(t).transpose();
            for (Eigen::Index k = 0; k < s.size(); ++k) {
              const auto& pool = w.score_errors[static_cast<std::size_t>(k)];
              s(k) += pool[draw_index(pool.size(), rng)];
            }
            const Eigen::Index r =
                static_cast<Eigen::Index>(draw_index(w.residual_pool.rows(), rng));
            resampled.row(t) =
                (curve_from_scores(w.fpca, s) + w.residual_pool.row(r).transpose()).transpose();
          }
          const FtsModel refit =
              fit_fts(FunctionalTimeSeries(fts.grid(), std::move(resampled)), options.model);
          fc = forecast_curve(refit, 1);
        } else {
          fc = bootstrap_curve(w, rng);
        }
        const Vector diff = fts.curve(w.target).transpose() - fc;
        const double err = squared_norm(diff, fts.grid());
        if (!std::isfinite(err)) throw std::runtime_error("non-finite bootstrap error");
        isfe.errors.push_back(err);
        isfe.holdout_index.push_back(w.holdout_index);
      }
      results[b] = detect_breakpoint(isfe, options.min_segment).break_index;
    } catch (const std::exception&) {
      failed[b] = 1;
    }
  });

  std::vector<long> samples;
  samples.reserve(b_count);
  int failures = 0;
  for (std::size_t b = 0; b < b_count; ++b) {
    if (failed[b]) {
      ++failures;
    } else {
      samples.push_back(results[b]);
    }
  }
  if (static_cast<double>(failures) > config.max_failure_fraction * config.replications) {
    throw std::runtime_error("bootstrap aborted: " + std::to_string(failures) + " of " +
                             std::to_string(config.replications) + " replications failed");
  }
  return summarize_stopping_times(std::move(samples), failures, config.replications);
}

BootstrapResult bootstrap_stopping_distribution(const FunctionalTimeSeries& fts,
                                                const BootstrapConfig& config,
                                                const DetectorOptions& options) {
  BootstrapResult out;
  out.plan = prepare_bootstrap(fts, options);
  out.distribution = resample_stopping_times(fts, out.plan, config, options);
  return out;
}

double sample_quantile(std::vector<long> samples, double prob) {
  if (samples.empty()) {
    throw std::invalid_argument("quantile of empty sample");
  }
  std::sort(samples.begin(), samples.end());
  const double pos = std::clamp(prob, 0.0, 1.0) * static_cast<double>(samples.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return static_cast<double>(samples[lo]) +
         frac * static_cast<double>(samples[hi] - samples[lo]);
}

}  // namespace ftstop
