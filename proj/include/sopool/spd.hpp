#pragma once

// Symmetric eigendecomposition helpers and the log-Euclidean map.

#include "common.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace sopool {

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]
};

/// Eigendecomposition of a symmetric matrix with ascending eigenvalues and
/// each eigenvector's first non-negligible component made positive, so the
/// result is reproducible.
inline SymmetricEigen symmetric_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("symmetric eigendecomposition did not converge");
  SymmetricEigen out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index k = 0; k < out.vectors.cols(); ++k) {
    auto v = out.vectors.col(k);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
  }
  return out;
}

/// E f(Λ) Eᵀ for a symmetric matrix, symmetrized on output.
template <typename Fn>
Matrix spectral_map(const SymmetricEigen& eig, Fn&& fn) {
  Vector mapped(eig.values.size());
  for (Eigen::Index k = 0; k < mapped.size(); ++k) mapped(k) = fn(eig.values(k));
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  return (out + out.transpose()) * 0.5;
}

/// Matrix logarithm of a symmetric positive definite matrix. `context`
/// names the pooling cell in error messages.
inline Matrix log_spd(const Matrix& f, const std::string& context = {}) {
  const std::string where = context.empty() ? std::string() : " (" + context + ")";
  if (f.rows() != f.cols()) throw Error("pooling", "log_spd needs a square matrix" + where);
  if (!f.allFinite()) throw Error("pooling", "non-finite entry in SPD matrix" + where);
  const double asym = (f - f.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) throw Error("pooling", "matrix is not symmetric" + where);
  const SymmetricEigen eig = symmetric_eigen(f);
  if (eig.values.size() > 0 && !(eig.values(0) > 0.0)) {
    throw Error("pooling", "non-positive eigenvalue " + std::to_string(eig.values(0)) + where);
  }
  return spectral_map(eig, [](double v) { return std::log(v); });
}

/// Matrix exponential of a symmetric matrix.
inline Matrix exp_symmetric(const Matrix& a) {
  return spectral_map(symmetric_eigen(a), [](double v) { return std::exp(v); });
}

/// Length of the upper-triangle vectorization of a p×p matrix.
inline constexpr Eigen::Index upper_triangle_size(Eigen::Index p) { return p * (p + 1) / 2; }

/// Writes the upper triangle row by row, scaling off-diagonal entries by
/// √2 so that ⟨vec(A), vec(B)⟩ = trace(A·B) for symmetric A, B.
template <typename Out>
void vectorize_upper(const Matrix& a, Out&& out) {
  constexpr double root2 = 1.4142135623730951;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out(k++) = a(i, i);
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) out(k++) = root2 * a(i, j);
  }
}

inline Vector vectorize_upper(const Matrix& a) {
  Vector out(upper_triangle_size(a.rows()));
  vectorize_upper(a, out);
  return out;
}

}  // namespace sopool
