#pragma once

#include "ftstop/covariance.hpp"

#include <optional>

namespace ftstop {

/// Truncated Karhunen-Loeve decomposition of a sample of curves:
/// X_t = mean + sum_k scores(t, k) * eigenfunctions.row(k) + residuals.row(t).
struct FpcaModel {
  Grid grid;
  Vector mean;
  /// Full non-negative spectrum, descending. Only the first `components` are retained.
  Vector eigenvalues;
  Matrix eigenfunctions;  // K x p, orthonormal under the quadrature inner product
  Matrix scores;          // n x K
  Matrix residuals;       // n x p
  Eigen::Index components = 0;
  /// Number of negative eigenvalues clamped to zero.
  Eigen::Index clamped = 0;
  /// True when the basis came from a long-run covariance surface.
  bool dynamic = false;
};

/// FPCA of `fts` with the eigenbasis of `surface` (which must live on the same grid).
FpcaModel fpca(const FunctionalTimeSeries& fts, const CovarianceSurface& surface,
               Eigen::Index components);

/// Dynamic FPCA: eigenbasis of the long-run covariance surface for `kernel`, computed in the
/// rank-sized whitened space. `components` defaults to the eigenvalue-ratio choice.
FpcaModel dynamic_fpca(const FunctionalTimeSeries& fts, const KernelSpec& kernel,
                       std::optional<Eigen::Index> components = std::nullopt);
FpcaModel dynamic_fpca(const FunctionalTimeSeries& fts, const WhitenedSample& sample,
                       const KernelSpec& kernel,
                       std::optional<Eigen::Index> components = std::nullopt);

/// Eigenvalue-ratio choice of the number of retained components.
Eigen::Index select_k(const Vector& eigenvalues, Eigen::Index n);

/// Value of the ratio criterion for k = 1..k_max (index 0 holds k = 1).
Vector select_k_profile(const Vector& eigenvalues, Eigen::Index n);

}  // namespace ftstop
