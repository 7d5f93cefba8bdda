#include "ftstop/kpss.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ftstop {

KpssResult kpss_test(std::span<const double> series, KpssType type) {
  const std::size_t n = series.size();
  if (n < 8) {
    throw std::invalid_argument("series too short");
  }
  const double dn = static_cast<double>(n);

  // residuals from the deterministic component (mean, or mean + linear trend)
  std::vector<double> e(series.begin(), series.end());
  if (type == KpssType::level) {
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / dn;
    for (double& v : e) v -= mean;
  } else {
    const double tbar = (dn + 1.0) / 2.0;
    const double ybar = std::accumulate(e.begin(), e.end(), 0.0) / dn;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double dt = static_cast<double>(t + 1) - tbar;
      sxy += dt * (e[t] - ybar);
      sxx += dt * dt;
    }
    const double slope = sxy / sxx;
    for (std::size_t t = 0; t < n; ++t) {
      e[t] -= ybar + slope * (static_cast<double>(t + 1) - tbar);
    }
  }

  KpssResult out;
  out.lags = static_cast<int>(std::floor(4.0 * std::pow(dn / 100.0, 0.25)));
  out.critical_value = type == KpssType::level ? kKpssLevelCritical5 : kKpssTrendCritical5;

  double partial = 0.0;
  double sum_sq_partial = 0.0;
  for (double v : e) {
    partial += v;
    sum_sq_partial += partial * partial;
  }

  double lrv = 0.0;
  for (double v : e) lrv += v * v;
  for (int s = 1; s <= out.lags && static_cast<std::size_t>(s) < n; ++s) {
    double acc = 0.0;
    for (std::size_t t = static_cast<std::size_t>(s); t < n; ++t) acc += e[t] * e[t - s];
    lrv += 2.0 * (1.0 - static_cast<double>(s) / (out.lags + 1.0)) * acc;
  }
  lrv /= dn;

  // a constant series has zero partial sums and zero variance; report 0
  double scale = 0.0;
  for (double v : series) scale = std::max(scale, std::abs(v));
  if (!(lrv > 1e-24 * std::max(1.0, scale * scale))) {
    out.statistic = 0.0;
  } else {
    out.statistic = sum_sq_partial / (dn * dn * lrv);
  }
  out.reject_stationarity = out.statistic > out.critical_value;
  return out;
}

}  // namespace ftstop
