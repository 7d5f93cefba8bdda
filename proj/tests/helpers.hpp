#pragma once

#include "ftstop/functional_series.hpp"
#include "ftstop/simulate.hpp"

#include <random>
#include <vector>

namespace test {

using ftstop::FunctionalTimeSeries;
using ftstop::Grid;
using ftstop::Matrix;
using ftstop::Vector;

// i.i.d. N(0,1) curves on a uniform grid over [0,1]
inline FunctionalTimeSeries random_series(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix x(n, p);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index i = 0; i < p; ++i) x(t, i) = z(rng);
  return FunctionalTimeSeries(Grid::uniform(0.0, 1.0, p), x);
}

// pointwise FAR(1) driven by Brownian motions
inline FunctionalTimeSeries far1_series(Eigen::Index n, Eigen::Index p, double rho,
                                        std::uint64_t seed) {
  const Grid g = Grid::uniform(0.0, 1.0, p);
  std::mt19937_64 rng(seed);
  Matrix x(n, p);
  Vector prev = ftstop::brownian_motion(g, rng);
  for (Eigen::Index t = 0; t < n; ++t) {
    prev = rho * prev + ftstop::brownian_motion(g, rng);
    x.row(t) = prev.transpose();
  }
  return FunctionalTimeSeries(g, x);
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> y(n);
  double prev = 0.0;
  for (int b = 0; b < 100; ++b) prev = phi * prev + z(rng);
  for (auto& v : y) v = prev = phi * prev + z(rng);
  return y;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> y(n);
  double acc = 0.0;
  for (auto& v : y) v = acc += z(rng);
  return y;
}

// rank-1 series mean(u) + score_t * phi(u) with phi orthonormal on the grid
inline FunctionalTimeSeries rank1_series(const std::vector<double>& scores, Eigen::Index p = 51) {
  const Grid g = Grid::uniform(0.0, 1.0, p);
  const Vector phi = (std::sqrt(2.0) * (6.283185307179586 * g.points().array()).cos()).matrix();
  const Vector mu = (1.0 + g.points().array()).matrix();
  Matrix x(static_cast<Eigen::Index>(scores.size()), p);
  for (std::size_t t = 0; t < scores.size(); ++t)
    x.row(static_cast<Eigen::Index>(t)) = (mu + scores[t] * phi).transpose();
  return FunctionalTimeSeries(g, x);
}

}  // namespace test
