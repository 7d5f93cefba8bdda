#include "ftstop/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace ftstop {

double kernel_weight(KernelType type, double x) {
  const double ax = std::abs(x);
  if (ax > 1.0) return 0.0;
  switch (type) {
    case KernelType::bartlett:
      return 1.0 - ax;
    case KernelType::flat_top:
      return ax <= 0.5 ? 1.0 : 2.0 * (1.0 - ax);
  }
  return 0.0;
}

double kernel_l2(KernelType type) {
  switch (type) {
    case KernelType::bartlett:
      return 2.0 / 3.0;
    case KernelType::flat_top:
      return 4.0 / 3.0;
  }
  return 1.0;
}

KernelType parse_kernel_type(std::string_view name) {
  if (name == "bartlett") return KernelType::bartlett;
  if (name == "flat_top" || name == "flat-top" || name == "flattop") return KernelType::flat_top;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

std::string to_string(KernelType type) {
  return type == KernelType::bartlett ? "bartlett" : "flat_top";
}

CovarianceSurface autocovariance_surface(const FunctionalTimeSeries& fts, Eigen::Index lag) {
  const Eigen::Index n = fts.size();
  const Eigen::Index abs_lag = lag < 0 ? -lag : lag;
  if (abs_lag >= n) {
    throw std::invalid_argument("lag exceeds sample");
  }
  const Matrix xc = centered_values(fts);
  const Eigen::Index m = n - abs_lag;
  Matrix gamma;
  gamma.noalias() = xc.topRows(m).transpose() * xc.bottomRows(m);
  gamma /= static_cast<double>(n);
  // the negative-lag branch is the transpose, taken literally so the reflection is exact
  if (lag < 0) gamma.transposeInPlace();
  return {fts.grid(), std::move(gamma)};
}

CovarianceSurface long_run_covariance(const FunctionalTimeSeries& fts, const KernelSpec& kernel) {
  if (!(kernel.bandwidth > 0.0)) {
    throw std::invalid_argument("kernel bandwidth must be positive");
  }
  const Eigen::Index n = fts.size();
  const Matrix xc = centered_values(fts);
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix acc = inv_n * (xc.transpose() * xc);
  for (Eigen::Index lag = 1; lag < n; ++lag) {
    const double w = kernel_weight(kernel.type, static_cast<double>(lag) / kernel.bandwidth);
    if (w == 0.0) {
      if (static_cast<double>(lag) > kernel.bandwidth) break;
      continue;
    }
    const Eigen::Index m = n - lag;
    const Matrix gamma = inv_n * (xc.topRows(m).transpose() * xc.bottomRows(m));
    acc += w * (gamma + gamma.transpose());
  }
  Matrix sym = 0.5 * (acc + acc.transpose());
  return {fts.grid(), std::move(sym)};
}

double surface_trace(const CovarianceSurface& surface) {
  return surface.grid.weights().dot(surface.matrix.diagonal());
}

double surface_squared_norm(const CovarianceSurface& surface) {
  const Vector& w = surface.grid.weights();
  return (w.asDiagonal() * surface.matrix.cwiseAbs2() * w.asDiagonal()).sum();
}

Matrix lag_weight_matrix(Eigen::Index n, const KernelSpec& kernel, int moment) {
  if (!(kernel.bandwidth > 0.0)) {
    throw std::invalid_argument("kernel bandwidth must be positive");
  }
  Matrix g = Matrix::Zero(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index lag = 0; lag < n; ++lag) {
    const double w = kernel_weight(kernel.type, static_cast<double>(lag) / kernel.bandwidth);
    if (w == 0.0) continue;
    const double value = w * std::pow(static_cast<double>(lag), moment) * inv_n;
    for (Eigen::Index s = 0; s + lag < n; ++s) {
      g(s, s + lag) = value;
      g(s + lag, s) = value;
    }
  }
  return g;
}

WhitenedSample whiten(const FunctionalTimeSeries& fts) {
  WhitenedSample out;
  out.mean = mean_function(fts);
  out.sqrt_weights = fts.grid().weights().cwiseSqrt();
  // p x n
  const Matrix zt = out.sqrt_weights.asDiagonal() *
                    (fts.values().rowwise() - out.mean.transpose()).transpose();
  const Eigen::Index p = zt.rows();
  const Eigen::Index n = zt.cols();
  const Eigen::Index r = std::min(p, n);
  Eigen::HouseholderQR<Matrix> qr(zt);
  out.basis = qr.householderQ() * Matrix::Identity(p, r);
  out.r_factor = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  return out;
}

double plugin_bandwidth(const WhitenedSample& sample, Eigen::Index n, const KernelSpec& kernel) {
  if (n < 4) {
    throw std::invalid_argument("plugin_bandwidth needs at least 4 curves");
  }
  const int q = kernel.type == KernelType::bartlett ? 1 : 2;
  const double dn = static_cast<double>(n);
  KernelSpec pilot = kernel;
  pilot.bandwidth = std::pow(dn, 0.2);

  const Matrix c0 = sample.core(lag_weight_matrix(n, pilot, 0));
  const Matrix cq = sample.core(lag_weight_matrix(n, pilot, q));
  const double trace = c0.trace();
  const double denom = c0.squaredNorm() + trace * trace;
  const double numer = 2.0 * q * cq.squaredNorm();
  if (!(denom > 1e-300) || !std::isfinite(numer)) {
    return 1.0;
  }
  const double rate = 1.0 / (2.0 * q + 1.0);
  const double constant = std::pow(numer / (denom * kernel_l2(kernel.type)), rate);
  const double bw = constant * std::pow(dn, rate);
  if (!std::isfinite(bw) || bw < 1.0) return 1.0;
  return bw;
}

double plugin_bandwidth(const FunctionalTimeSeries& fts, const KernelSpec& kernel) {
  if (fts.size() < 4) {
    throw std::invalid_argument("plugin_bandwidth needs at least 4 curves");
  }
  return plugin_bandwidth(whiten(fts), fts.size(), kernel);
}

}  // namespace ftstop
