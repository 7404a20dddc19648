#pragma once

// ZCA whitening fit on a sample of contrast-normalized training patches.

#include "common.hpp"
#include "spd.hpp"

#include <cmath>
#include <string>

namespace sopool {

struct ZcaTransform {
  RowVector mean;  // per-dimension mean of the fitting sample
  Matrix matrix;   // symmetric, E (Λ + eps·I)^(−1/2) Eᵀ
  double eps = 0.1;

  Eigen::Index dim() const { return mean.size(); }
};

/// Fits ZCA on n × dim patches. The covariance is (Xc ᵀ Xc)/n; tiny
/// negative eigenvalues from roundoff are clamped to zero.
inline ZcaTransform fit_zca(const RowMatrix& patches, double eps) {
  const Eigen::Index n = patches.rows();
  const Eigen::Index dim = patches.cols();
  if (dim == 0) throw Error("whitening", "patches have zero dimension");
  if (eps < 0 || !std::isfinite(eps)) throw Error("whitening", "eps_zca must be finite and >= 0");
  if (n < dim) {
    throw Error("whitening", "need at least " + std::to_string(dim) + " sample patches to estimate a " +
                                 std::to_string(dim) + "-dimensional covariance, got " + std::to_string(n) +
                                 "; supply more training images");
  }
  ZcaTransform t;
  t.eps = eps;
  t.mean = patches.colwise().mean();
  const RowMatrix centered = patches.rowwise() - t.mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);
  cov = (cov + cov.transpose()) * 0.5;
  const SymmetricEigen eig = symmetric_eigen(cov);
  const double top = std::max(eig.values(eig.values.size() - 1), 0.0);
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eps == 0.0 && eig.values(k) <= 1e-12 * top) {
      throw Error("whitening", "covariance is singular and eps_zca is 0; use a positive eps_zca");
    }
  }
  t.matrix = spectral_map(eig, [eps](double v) { return 1.0 / std::sqrt(std::max(v, 0.0) + eps); });
  return t;
}

/// Maps each row x to (x − mean)·matrix.
inline RowMatrix apply_zca(const ZcaTransform& t, const RowMatrix& patches) {
  if (patches.cols() != t.dim()) {
    throw Error("whitening", "patch dimension " + std::to_string(patches.cols()) +
                                 " does not match transform dimension " + std::to_string(t.dim()));
  }
  RowMatrix out = (patches.rowwise() - t.mean) * t.matrix;
  return out;
}

}  // namespace sopool
