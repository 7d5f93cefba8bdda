#include "ftstop/fpca.hpp"

#include <cmath>
#include <stdexcept>

namespace ftstop {

namespace {

// Eigen-decomposition results in whitened coordinates, columns sorted by descending value.
struct Spectrum {
  Vector values;
  Matrix vectors;
  Eigen::Index clamped = 0;
};

Spectrum descending_spectrum(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver failed to converge");
  }
  const Eigen::Index m = symmetric.rows();
  Spectrum out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (out.values(i) < 0.0) {
      out.values(i) = 0.0;
      ++out.clamped;
    }
  }
  return out;
}

// Sign convention: the entry of largest magnitude is positive.
void orient(Eigen::Ref<Vector> v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;
}

FpcaModel project(const FunctionalTimeSeries& fts, Vector mean, Vector eigenvalues,
                  Matrix eigenfunctions, Eigen::Index clamped, bool dynamic) {
  FpcaModel model;
  model.grid = fts.grid();
  model.mean = std::move(mean);
  model.eigenvalues = std::move(eigenvalues);
  model.eigenfunctions = std::move(eigenfunctions);
  model.components = model.eigenfunctions.rows();
  model.clamped = clamped;
  model.dynamic = dynamic;
  const Matrix xc = fts.values().rowwise() - model.mean.transpose();
  model.scores.noalias() =
      xc * fts.grid().weights().asDiagonal() * model.eigenfunctions.transpose();
  model.residuals = xc;
  model.residuals.noalias() -= model.scores * model.eigenfunctions;
  return model;
}

}  // namespace

FpcaModel fpca(const FunctionalTimeSeries& fts, const CovarianceSurface& surface,
               Eigen::Index components) {
  const Eigen::Index p = fts.grid_size();
  if (components < 1 || components > p) {
    throw std::invalid_argument("fpca: component count " + std::to_string(components) +
                                " outside [1, " + std::to_string(p) + "]");
  }
  if (!(surface.grid == fts.grid())) {
    throw std::invalid_argument("fpca: surface grid differs from series grid");
  }
  const Matrix& m = surface.matrix;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("fpca: covariance surface is not symmetric");
  }
  const Vector sqrt_w = fts.grid().weights().cwiseSqrt();
  const Matrix whitened = sqrt_w.asDiagonal() * (0.5 * (m + m.transpose())) * sqrt_w.asDiagonal();
  Spectrum spec = descending_spectrum(whitened);

  Matrix phi(components, p);
  for (Eigen::Index k = 0; k < components; ++k) {
    Vector f = spec.vectors.col(k).cwiseQuotient(sqrt_w);
    orient(f);
    phi.row(k) = f.transpose();
  }
  return project(fts, mean_function(fts), std::move(spec.values), std::move(phi), spec.clamped,
                 false);
}

FpcaModel dynamic_fpca(const FunctionalTimeSeries& fts, const WhitenedSample& sample,
                       const KernelSpec& kernel, std::optional<Eigen::Index> components) {
  const Eigen::Index n = fts.size();
  const Matrix core = sample.core(lag_weight_matrix(n, kernel));
  Spectrum spec = descending_spectrum(0.5 * (core + core.transpose()));
  const Eigen::Index rank = spec.values.size();

  Eigen::Index k_hat = components ? *components : select_k(spec.values, n);
  if (k_hat < 1 || k_hat > rank) {
    throw std::invalid_argument("dynamic_fpca: component count " + std::to_string(k_hat) +
                                " outside [1, " + std::to_string(rank) + "]");
  }
  const Eigen::Index p = fts.grid_size();
  Matrix phi(k_hat, p);
  for (Eigen::Index k = 0; k < k_hat; ++k) {
    Vector f = (sample.basis * spec.vectors.col(k)).cwiseQuotient(sample.sqrt_weights);
    orient(f);
    phi.row(k) = f.transpose();
  }
  return project(fts, sample.mean, std::move(spec.values), std::move(phi), spec.clamped, true);
}

FpcaModel dynamic_fpca(const FunctionalTimeSeries& fts, const KernelSpec& kernel,
                       std::optional<Eigen::Index> components) {
  return dynamic_fpca(fts, whiten(fts), kernel, components);
}

Vector select_k_profile(const Vector& eigenvalues, Eigen::Index n) {
  const Eigen::Index m = eigenvalues.size();
  if (m < 2) {
    throw std::invalid_argument("select_k needs at least 2 eigenvalues");
  }
  const double lead = eigenvalues(0);
  if (!(lead > 0.0)) {
    return Vector::Ones(1);
  }
  const double theta = 1.0 / std::log(std::max(lead, static_cast<double>(n)));
  const Eigen::Index summed = std::min(m, std::max<Eigen::Index>(n, 1));
  const double floor = eigenvalues.head(summed).sum() / static_cast<double>(n);
  Eigen::Index k_max = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (eigenvalues(k) >= floor) ++k_max;
  }
  k_max = std::clamp<Eigen::Index>(k_max, 1, m - 1);

  Vector profile(k_max);
  for (Eigen::Index k = 0; k < k_max; ++k) {
    const double relative = eigenvalues(k) / lead;
    profile(k) = relative >= theta ? eigenvalues(k + 1) / eigenvalues(k) : 1.0;
  }
  return profile;
}

Eigen::Index select_k(const Vector& eigenvalues, Eigen::Index n) {
  const Vector profile = select_k_profile(eigenvalues, n);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < profile.size(); ++k) {
    if (profile(k) < profile(best)) best = k;
  }
  return best + 1;
}

}  // namespace ftstop
