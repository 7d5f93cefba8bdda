#pragma once

#include "ftstop/grid.hpp"

#include <vector>

namespace ftstop {

/// n curves on a shared grid; row t holds curve t.
class FunctionalTimeSeries {
 public:
  FunctionalTimeSeries() = default;
  FunctionalTimeSeries(Grid grid, Matrix values);
  FunctionalTimeSeries(Grid grid, Matrix values, std::vector<long> time_index);

  const Grid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  const std::vector<long>& time_index() const { return time_index_; }

  Eigen::Index size() const { return values_.rows(); }
  Eigen::Index grid_size() const { return values_.cols(); }

  auto curve(Eigen::Index t) const { return values_.row(t); }

  /// Curves [first, first + count) as a new series (time labels preserved).
  FunctionalTimeSeries slice(Eigen::Index first, Eigen::Index count) const;

 private:
  Grid grid_;
  Matrix values_;
  std::vector<long> time_index_;
};

/// Pointwise sample mean of the curves.
Vector mean_function(const FunctionalTimeSeries& fts);

/// Curves minus their pointwise mean.
Matrix centered_values(const FunctionalTimeSeries& fts);

}  // namespace ftstop
