#pragma once

#include <span>

namespace ftstop {

enum class KpssType { level, trend };

struct KpssResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  int lags = 0;
  bool reject_stationarity = false;
};

/// 5% critical values of the KPSS statistic.
inline constexpr double kKpssLevelCritical5 = 0.463;
inline constexpr double kKpssTrendCritical5 = 0.146;

/// KPSS stationarity test with Bartlett long-run variance and l = floor(4 (n/100)^(1/4)) lags.
/// Throws for fewer than 8 observations.
KpssResult kpss_test(std::span<const double> series, KpssType type = KpssType::level);

inline KpssResult kpss_level_test(std::span<const double> series) {
  return kpss_test(series, KpssType::level);
}

}  // namespace ftstop
