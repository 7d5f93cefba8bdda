#include "ftstop/functional_series.hpp"
#include "ftstop/grid.hpp"

#include <cmath>
#include <numeric>

namespace ftstop {

Vector trapezoid_weights(const Vector& points) {
  const Eigen::Index p = points.size();
  Vector w = Vector::Zero(p);
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    const double half = 0.5 * (points(i + 1) - points(i));
    w(i) += half;
    w(i + 1) += half;
  }
  return w;
}

Grid::Grid(Vector points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("grid needs at least 2 points");
  }
  for (Eigen::Index i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_(i))) {
      throw std::invalid_argument("grid point " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(points_(i) > points_(i - 1))) {
      throw std::invalid_argument("grid points must be strictly increasing (index " +
                                  std::to_string(i) + ")");
    }
  }
  weights_ = trapezoid_weights(points_);
}

Grid Grid::uniform(double lo, double hi, Eigen::Index count) {
  if (count < 2 || !(hi > lo)) {
    throw std::invalid_argument("uniform grid needs count >= 2 and hi > lo");
  }
  Vector pts(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    pts(i) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  pts(count - 1) = hi;
  return Grid(std::move(pts));
}

FunctionalTimeSeries::FunctionalTimeSeries(Grid grid, Matrix values)
    : FunctionalTimeSeries(std::move(grid), std::move(values), {}) {}

FunctionalTimeSeries::FunctionalTimeSeries(Grid grid, Matrix values,
                                           std::vector<long> time_index)
    : grid_(std::move(grid)), values_(std::move(values)), time_index_(std::move(time_index)) {
  if (values_.rows() < 1) {
    throw std::invalid_argument("empty input");
  }
  if (values_.cols() != grid_.size()) {
    throw std::invalid_argument("curve length " + std::to_string(values_.cols()) +
                                " does not match grid size " +
                                std::to_string(grid_.size()));
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("functional time series contains non-finite values");
  }
  if (time_index_.empty()) {
    time_index_.resize(static_cast<std::size_t>(values_.rows()));
    std::iota(time_index_.begin(), time_index_.end(), 1L);
  } else if (static_cast<Eigen::Index>(time_index_.size()) != values_.rows()) {
    throw std::invalid_argument("time index length does not match curve count");
  }
}

FunctionalTimeSeries FunctionalTimeSeries::slice(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 1 || first + count > size()) {
    throw std::out_of_range("slice outside series");
  }
  std::vector<long> labels(time_index_.begin() + first, time_index_.begin() + first + count);
  return FunctionalTimeSeries(grid_, values_.middleRows(first, count), std::move(labels));
}

Vector mean_function(const FunctionalTimeSeries& fts) {
  if (fts.size() < 1) {
    throw std::invalid_argument("empty input");
  }
  return fts.values().colwise().mean().transpose();
}

Matrix centered_values(const FunctionalTimeSeries& fts) {
  const Vector mean = mean_function(fts);
  return fts.values().rowwise() - mean.transpose();
}

}  // namespace ftstop
