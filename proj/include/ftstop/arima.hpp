#pragma once

#include "ftstop/kpss.hpp"

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ftstop {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;

  bool operator==(const ArimaOrder&) const = default;
};

std::string to_string(const ArimaOrder& order);

/// Fitted ARIMA(p, d, q) on a univariate series.
///
/// The differenced series w_t = (1 - B)^d y_t follows
///   w_t - mu = sum_i ar[i] (w_{t-i} - mu) + e_t + sum_j ma[j] e_{t-j},
/// where mu (`constant`) is the mean for d = 0 and the drift for d = 1. The equivalent
/// intercept form w_t = c + ... has c = intercept().
struct ArimaModel {
  ArimaOrder order;
  bool drift = false;
  double constant = 0.0;
  std::vector<double> ar;
  std::vector<double> ma;
  double sigma2 = 0.0;
  /// One-step innovations on the differenced scale (length = series length - d).
  std::vector<double> residuals;
  double loglik = 0.0;
  double aicc = std::numeric_limits<double>::infinity();

  /// Training series on the original scale.
  std::vector<double> series;
  /// Filtered state after the last observation, used by forecast().
  std::vector<double> state;

  double intercept() const;
  int parameter_count() const;
};

inline constexpr double kSigma2Floor = 1e-12;

/// d-fold first differences.
std::vector<double> difference(std::span<const double> x, int d);

/// Inverse of difference(): rebuilds the series from its differences and first d values.
std::vector<double> undifference(std::span<const double> diffs, std::span<const double> head,
                                 int d);

/// Smallest d in 0..max_d whose d-times differenced series passes the KPSS test.
int select_d(std::span<const double> series, int max_d = 2, KpssType type = KpssType::level);

/// Exact Gaussian likelihood quantities for fixed coefficients.
ArimaModel evaluate_arima(std::span<const double> series, ArimaOrder order, bool drift,
                          std::span<const double> ar, std::span<const double> ma,
                          double constant);

/// Maximum likelihood fit: conditional-sum-of-squares start refined by the exact likelihood.
/// Drift is only honoured for d < 2. Throws std::runtime_error("estimation failed").
ArimaModel fit_arima(std::span<const double> series, ArimaOrder order, bool drift);

struct AutoArimaOptions {
  int max_p = 5;
  int max_q = 5;
  int max_d = 2;
  KpssType kpss = KpssType::level;
  /// Neighbourhood search; false evaluates every (p, q, constant) in the box.
  bool stepwise = true;
};

struct ArimaCandidate {
  ArimaOrder order;
  bool drift = false;
  double aicc = std::numeric_limits<double>::infinity();
  bool ok = false;
};

/// AICc search over (p, q) (stepwise by default) with d chosen by successive KPSS tests.
/// Falls back to ARIMA(0, d, 0) when every candidate fails. Requires >= 10 observations.
ArimaModel auto_arima(std::span<const double> series, const AutoArimaOptions& options = {},
                      std::vector<ArimaCandidate>* trace = nullptr);

/// h-step mean forecasts on the original scale.
std::vector<double> forecast(const ArimaModel& model, int h);

/// Smallest modulus among the roots of 1 - sum ar_i z^i and 1 + sum ma_j z^j (inf if none).
double min_root_modulus(const ArimaModel& model);

}  // namespace ftstop
