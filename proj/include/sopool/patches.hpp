#pragma once

// Dense r×r patch extraction on a stride-s grid plus per-patch
// brightness/contrast normalization.

#include "common.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace sopool {

/// Row k holds the row-major flattening of the patch at grid position
/// grid_coords[k]; rows are ordered row-major over the grid.
struct PatchSet {
  RowMatrix vectors;
  std::vector<std::pair<int, int>> grid_coords;
  int patch_side = 0;
  int stride = 0;
  int grid_rows = 0;
  int grid_cols = 0;

  Eigen::Index size() const { return vectors.rows(); }
};

/// Variance floor below which a patch is treated as constant.
inline constexpr double kPatchVarianceFloor = 1e-8;

/// Number of grid positions along an axis of length `extent`:
/// floor((extent − r)/s + 1).
inline int grid_extent(Eigen::Index extent, int r, int s) {
  if (r <= 0 || s <= 0) throw Error("patches", "patch side and stride must be positive");
  if (r > extent) {
    throw Error("patches", "image too small: patch side " + std::to_string(r) +
                               " exceeds image extent " + std::to_string(extent));
  }
  return static_cast<int>((extent - r) / s + 1);
}

/// Gathers every r×r patch whose top-left corner lies on the stride grid.
/// Rectangular images yield a grid_rows × grid_cols grid.
inline PatchSet extract_patches(const RowMatrix& pixels, int r, int s) {
  PatchSet out;
  out.patch_side = r;
  out.stride = s;
  out.grid_rows = grid_extent(pixels.rows(), r, s);
  out.grid_cols = grid_extent(pixels.cols(), r, s);
  const Eigen::Index count = static_cast<Eigen::Index>(out.grid_rows) * out.grid_cols;
  out.vectors.resize(count, static_cast<Eigen::Index>(r) * r);
  out.grid_coords.reserve(static_cast<std::size_t>(count));
  Eigen::Index k = 0;
  for (int i = 0; i < out.grid_rows; ++i) {
    for (int j = 0; j < out.grid_cols; ++j, ++k) {
      out.grid_coords.emplace_back(i, j);
      for (int a = 0; a < r; ++a) {
        out.vectors.row(k).segment(static_cast<Eigen::Index>(a) * r, r) =
            pixels.row(static_cast<Eigen::Index>(i) * s + a).segment(static_cast<Eigen::Index>(j) * s, r);
      }
    }
  }
  return out;
}

/// (x − mean)/std with the population standard deviation; patches whose
/// variance is below kPatchVarianceFloor map to the zero vector.
template <typename Derived>
void normalize_patch_inplace(Eigen::MatrixBase<Derived>&& x) {
  const auto n = static_cast<double>(x.size());
  const double mean = x.sum() / n;
  x.array() -= mean;
  const double var = x.squaredNorm() / n;
  if (var <= kPatchVarianceFloor) {
    x.setZero();
  } else {
    x /= std::sqrt(var);
  }
}

inline Vector normalize_patch(const Vector& x) {
  if (x.size() == 0) throw Error("patches", "cannot normalize an empty patch");
  Vector out = x;
  normalize_patch_inplace(out.col(0));
  return out;
}

/// Normalizes every row of a patch matrix in place.
inline void normalize_rows(RowMatrix& patches) {
  if (patches.cols() == 0) return;
  for (Eigen::Index k = 0; k < patches.rows(); ++k) normalize_patch_inplace(patches.row(k));
}

}  // namespace sopool
