#pragma once

#include "ftstop/functional_series.hpp"

#include <string>
#include <string_view>

namespace ftstop {

enum class KernelType { bartlett, flat_top };

/// Lag window W of bounded support [-1, 1] with W(0) = 1.
struct KernelSpec {
  KernelType type = KernelType::bartlett;
  double bandwidth = 1.0;
  int order = 1;

  static KernelSpec bartlett(double bandwidth) { return {KernelType::bartlett, bandwidth, 1}; }
  static KernelSpec flat_top(double bandwidth) { return {KernelType::flat_top, bandwidth, 2}; }
};

double kernel_weight(KernelType type, double x);

/// integral of W(x)^2 over [-1, 1]
double kernel_l2(KernelType type);

KernelType parse_kernel_type(std::string_view name);
std::string to_string(KernelType type);

/// Evaluations of a bivariate surface on grid x grid.
struct CovarianceSurface {
  Grid grid;
  Matrix matrix;
};

/// Lag-l sample autocovariance surface (1/n normalisation); lag 0 is the sample covariance.
CovarianceSurface autocovariance_surface(const FunctionalTimeSeries& fts, Eigen::Index lag);

/// Kernel-weighted sum of autocovariance surfaces, symmetrised.
CovarianceSurface long_run_covariance(const FunctionalTimeSeries& fts, const KernelSpec& kernel);

/// Quadrature trace of a surface: sum_i w_i C(u_i, u_i).
double surface_trace(const CovarianceSurface& surface);

/// Squared L2 norm of a surface: sum_ij w_i w_j C(u_i, u_j)^2.
double surface_squared_norm(const CovarianceSurface& surface);

/// Toeplitz matrix G with G(s, t) = W((t - s) / bandwidth) |t - s|^moment / n, so that the
/// kernel-weighted surface equals Xc^T G Xc for centred data Xc.
Matrix lag_weight_matrix(Eigen::Index n, const KernelSpec& kernel, int moment = 0);

/// Centred curves mapped to quadrature coordinates and reduced by a thin QR:
/// (Xc diag(sqrt(w)))^T = basis * r_factor.
/// Every lag-weighted surface Xc^T G Xc then has whitened form basis * (R G R^T) * basis^T,
/// so eigenproblems and norms reduce to rank-sized matrices.
struct WhitenedSample {
  Vector mean;
  Matrix basis;     // p x r, orthonormal columns
  Matrix r_factor;  // r x n
  Vector sqrt_weights;

  Matrix core(const Matrix& lag_weights) const {
    return r_factor * lag_weights * r_factor.transpose();
  }
};

WhitenedSample whiten(const FunctionalTimeSeries& fts);

/// Data-driven bandwidth from a two-stage plug-in: pilot n^(1/5), then the rate-optimal
/// c * n^(1/(2q+1)) with c estimated from the pilot surfaces. Never below 1.
double plugin_bandwidth(const FunctionalTimeSeries& fts, const KernelSpec& kernel);
double plugin_bandwidth(const WhitenedSample& sample, Eigen::Index n, const KernelSpec& kernel);

}  // namespace ftstop
