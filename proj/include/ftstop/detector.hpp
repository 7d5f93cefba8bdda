#pragma once

#include "ftstop/fts_model.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace ftstop {

/// Integrated squared one-step forecast errors from the expanding-window scheme.
/// errors[i] belongs to curve position holdout_index[i] (1-based).
struct IsfeSeries {
  std::vector<double> errors;
  std::vector<long> holdout_index;
  /// Retained component count of the model that produced each forecast.
  std::vector<Eigen::Index> components;
};

struct BreakpointResult {
  /// Last position (holdout time scale) of the first regime.
  long break_index = 0;
  /// Candidate break positions and their sum of squared residuals.
  std::vector<long> candidates;
  std::vector<double> ssr_profile;
  double pre_mean = 0.0;
  double post_mean = 0.0;
  long stopping_time = 0;
};

struct DetectorOptions {
  FtsOptions model;
  /// Size of a fixed rolling window; the expanding scheme when empty.
  std::optional<Eigen::Index> fixed_window;
  int min_segment = 2;
  /// Worker threads for independent windows (0 = hardware concurrency).
  unsigned threads = 1;
};

/// A training window whose model could not be fitted.
class WindowError : public std::runtime_error {
 public:
  WindowError(long gamma, const std::string& what)
      : std::runtime_error("window gamma=" + std::to_string(gamma) + ": " + what), gamma_(gamma) {}
  long gamma() const { return gamma_; }

 private:
  long gamma_;
};

/// Number of curves in the first training window.
inline constexpr Eigen::Index kFirstWindow = 3;

/// Training window [first, first + count) used to forecast curve `target` (0-based).
std::pair<Eigen::Index, Eigen::Index> training_window(Eigen::Index target,
                                                      const DetectorOptions& options);

/// For gamma = 3..n-1: fit on curves 1..gamma, forecast curve gamma+1, integrate the
/// squared error. Returns n - 3 errors.
IsfeSeries rolling_isfe(const FunctionalTimeSeries& fts, const DetectorOptions& options = {});

/// Single mean shift in the first differences of the error series, located by exhaustive
/// sum-of-squared-residuals minimisation. Ties resolve to the earliest candidate.
BreakpointResult detect_breakpoint(const IsfeSeries& isfe, int min_segment = 2);

struct StoppingTimeReport {
  IsfeSeries isfe;
  BreakpointResult breakpoint;
};

StoppingTimeReport stopping_time(const FunctionalTimeSeries& fts,
                                 const DetectorOptions& options = {});

}  // namespace ftstop
