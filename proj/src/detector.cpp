#include "ftstop/detector.hpp"

#include "ftstop/parallel.hpp"

#include <limits>

namespace ftstop {

std::pair<Eigen::Index, Eigen::Index> training_window(Eigen::Index target,
                                                      const DetectorOptions& options) {
  Eigen::Index first = 0;
  if (options.fixed_window) {
    const Eigen::Index w = std::max(*options.fixed_window, kFirstWindow);
    first = std::max<Eigen::Index>(0, target - w);
  }
  return {first, target - first};
}

IsfeSeries rolling_isfe(const FunctionalTimeSeries& fts, const DetectorOptions& options) {
  const Eigen::Index n = fts.size();
  if (n < 5) {
    throw std::invalid_argument("rolling_isfe needs at least 5 curves");
  }
  const std::size_t count = static_cast<std::size_t>(n - kFirstWindow);
  IsfeSeries out;
  out.errors.resize(count);
  out.holdout_index.resize(count);
  out.components.resize(count);

  parallel_for(count, options.threads, [&](std::size_t i) {
    const Eigen::Index target = kFirstWindow + static_cast<Eigen::Index>(i);
    const auto [first, len] = training_window(target, options);
    try {
      const FtsModel model = fit_fts(fts.slice(first, len), options.model);
      const Vector fc = forecast_curve(model, 1);
      const Vector diff = fts.curve(target).transpose() - fc;
      const double err = squared_norm(diff, fts.grid());
      if (!std::isfinite(err)) throw std::runtime_error("non-finite forecast error");
      out.errors[i] = err;
      out.components[i] = model.fpca.components;
    } catch (const std::exception& e) {
      throw WindowError(static_cast<long>(target), e.what());
    }
    out.holdout_index[i] = static_cast<long>(target + 1);
  });
  return out;
}

BreakpointResult detect_breakpoint(const IsfeSeries& isfe, int min_segment) {
  if (min_segment < 1) {
    throw std::invalid_argument("min_segment must be >= 1");
  }
  const std::size_t len = isfe.errors.size();
  if (len < static_cast<std::size_t>(2 * min_segment + 1)) {
    throw std::invalid_argument("insufficient errors for split");
  }
  if (isfe.holdout_index.size() != len) {
    throw std::invalid_argument("holdout index length does not match error count");
  }
  const std::size_t m = len - 1;
  std::vector<double> delta(m);
  for (std::size_t i = 0; i < m; ++i) delta[i] = isfe.errors[i + 1] - isfe.errors[i];

  const auto segment = [&](std::size_t lo, std::size_t hi, double& mean) {
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += delta[i];
    mean = sum / static_cast<double>(hi - lo);
    double ssr = 0.0;
    for (std::size_t i = lo; i < hi; ++i) ssr += (delta[i] - mean) * (delta[i] - mean);
    return ssr;
  };

  BreakpointResult out;
  const std::size_t ms = static_cast<std::size_t>(min_segment);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = ms; j + ms <= m; ++j) {
    double pre = 0.0;
    double post = 0.0;
    const double ssr = segment(0, j, pre) + segment(j, m, post);
    // delta[j - 1] = errors[j] - errors[j - 1] closes the first regime
    const long index = isfe.holdout_index[j];
    out.candidates.push_back(index);
    out.ssr_profile.push_back(ssr);
    if (ssr < best) {
      best = ssr;
      out.break_index = index;
      out.pre_mean = pre;
      out.post_mean = post;
    }
  }
  out.stopping_time = out.break_index;
  return out;
}

StoppingTimeReport stopping_time(const FunctionalTimeSeries& fts, const DetectorOptions& options) {
  StoppingTimeReport report;
  report.isfe = rolling_isfe(fts, options);
  report.breakpoint = detect_breakpoint(report.isfe, options.min_segment);
  return report;
}

}  // namespace ftstop
