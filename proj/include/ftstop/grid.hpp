#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ftstop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sampling points of the continuum together with trapezoid quadrature weights.
class Grid {
 public:
  Grid() = default;
  explicit Grid(Vector points);

  /// `count` equally spaced points on [lo, hi].
  static Grid uniform(double lo, double hi, Eigen::Index count);

  Eigen::Index size() const { return points_.size(); }
  const Vector& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  double lower() const { return points_(0); }
  double upper() const { return points_(points_.size() - 1); }
  double length() const { return upper() - lower(); }

  bool operator==(const Grid& other) const { return points_ == other.points_; }

 private:
  Vector points_;
  Vector weights_;
};

/// Quadrature inner product sum_i w_i f_i g_i.
template <typename DerivedF, typename DerivedG>
double inner_product(const Eigen::MatrixBase<DerivedF>& f,
                     const Eigen::MatrixBase<DerivedG>& g, const Grid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size()) {
    throw std::invalid_argument("inner_product: length mismatch (" +
                                std::to_string(f.size()) + ", " +
                                std::to_string(g.size()) + " vs grid " +
                                std::to_string(grid.size()) + ")");
  }
  double acc = 0.0;
  const auto& w = grid.weights();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i) * f.derived().coeff(i) * g.derived().coeff(i);
  }
  return acc;
}

template <typename Derived>
double squared_norm(const Eigen::MatrixBase<Derived>& f, const Grid& grid) {
  return inner_product(f, f, grid);
}

/// Trapezoid weights for a strictly increasing point set.
Vector trapezoid_weights(const Vector& points);

}  // namespace ftstop
