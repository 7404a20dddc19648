#pragma once

// Closed-form ridge-regression multi-class classifier.

#include "common.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace sopool {

struct RidgeModel {
  Matrix weights;                    // D × C
  std::vector<std::string> classes;  // column order of `weights`
  double lambda = 1.0;

  Eigen::Index dim() const { return weights.rows(); }
};

enum class RidgeForm { automatic, primal, dual };

/// Sorted class list and the N × C one-hot target matrix.
inline std::pair<std::vector<std::string>, Matrix> one_hot(const std::vector<std::string>& labels) {
  std::vector<std::string> classes(labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::map<std::string, Eigen::Index> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index[classes[c]] = static_cast<Eigen::Index>(c);
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(classes.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), index[labels[i]]) = 1.0;
  return {std::move(classes), std::move(y)};
}

namespace detail {

// Cholesky solve of an SPD system with a per-column relative residual check.
inline Matrix solve_spd_checked(const Matrix& a, const Matrix& b) {
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw Error("classifier", "ridge system is not positive definite");
  Matrix z = llt.solve(b);
  const Matrix residual = a * z - b;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    const double bn = b.col(c).norm();
    const double rel = bn > 0.0 ? residual.col(c).norm() / bn : residual.col(c).norm();
    if (!(rel <= 1e-8)) {
      throw Error("classifier", "ridge solve residual " + std::to_string(rel) + " exceeds 1e-8 in column " +
                                    std::to_string(c));
    }
  }
  return z;
}

}  // namespace detail

/// Fits W minimizing ‖XW − Y‖² + λ‖W‖² with one-hot Y. The dual form
/// Xᵀ(XXᵀ + λI)⁻¹Y is used when N ≤ D, the primal (XᵀX + λI)⁻¹XᵀY otherwise.
inline RidgeModel train_ridge(const RowMatrix& x, const std::vector<std::string>& labels, double lambda,
                              RidgeForm form = RidgeForm::automatic) {
  if (static_cast<std::size_t>(x.rows()) != labels.size())
    throw Error("classifier", "descriptor count does not match label count");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("classifier", "lambda must be positive");
  if (!x.allFinite()) throw Error("classifier", "descriptors contain non-finite values");
  auto [classes, y] = one_hot(labels);
  if (classes.size() < 2) throw Error("classifier", "need at least 2 distinct classes");

  const Eigen::Index n = x.rows(), d = x.cols();
  if (form == RidgeForm::automatic) form = n <= d ? RidgeForm::dual : RidgeForm::primal;

  RidgeModel model;
  model.classes = std::move(classes);
  model.lambda = lambda;
  if (form == RidgeForm::dual) {
    Matrix gram = x * x.transpose();
    gram.diagonal().array() += lambda;
    model.weights = x.transpose() * detail::solve_spd_checked(gram, y);
  } else {
    Matrix gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    model.weights = detail::solve_spd_checked(gram, x.transpose() * y);
  }
  if (!model.weights.allFinite()) throw Error("classifier", "ridge weights are not finite");
  return model;
}

/// Class scores x·W.
inline RowVector ridge_scores(const RidgeModel& model, const Eigen::Ref<const RowVector>& x) {
  if (x.size() != model.dim()) {
    throw Error("classifier", "descriptor dimension " + std::to_string(x.size()) + " does not match model " +
                                  std::to_string(model.dim()));
  }
  return x * model.weights;
}

/// Index of the highest score; ties go to the lowest index.
inline Eigen::Index predict_index(const RidgeModel& model, const Eigen::Ref<const RowVector>& x) {
  const RowVector s = ridge_scores(model, x);
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < s.size(); ++c)
    if (s(c) > s(best)) best = c;
  return best;
}

inline const std::string& predict(const RidgeModel& model, const Eigen::Ref<const RowVector>& x) {
  return model.classes[static_cast<std::size_t>(predict_index(model, x))];
}

}  // namespace sopool
