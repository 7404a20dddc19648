#pragma once

// Second-order average pooling over spatial pyramid cells, log-Euclidean
// mapping and vectorization into one descriptor.

#include "binary_io.hpp"
#include "common.hpp"
#include "spd.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sopool {

struct PyramidConfig {
  std::vector<int> grids{1, 2, 4, 6, 8};
  double eps_spd = 1e-3;
  bool l2_normalize = true;

  void validate() const {
    if (grids.empty()) throw Error("pooling", "pyramid needs at least one grid");
    for (std::size_t i = 0; i < grids.size(); ++i) {
      if (grids[i] < 1) throw Error("pooling", "grid sides must be >= 1");
      if (i > 0 && grids[i] <= grids[i - 1]) throw Error("pooling", "grid sides must be strictly increasing");
    }
    if (!(eps_spd >= 0.0)) throw Error("pooling", "eps_spd must be >= 0");
  }
};

/// Longest pyramid used in the experiments; depth-n pyramids are its prefixes.
inline const std::vector<int>& full_pyramid() {
  static const std::vector<int> grids{1, 2, 4, 6, 8, 10, 12, 15};
  return grids;
}

inline std::vector<int> pyramid_of_depth(std::size_t depth) {
  const auto& full = full_pyramid();
  if (depth < 1 || depth > full.size())
    throw Error("pooling", "pyramid depth must be in [1, " + std::to_string(full.size()) + "]");
  return {full.begin(), full.begin() + static_cast<std::ptrdiff_t>(depth)};
}

struct PooledDescriptor {
  Vector values;
  Eigen::Index code_width = 0;
  Eigen::Index cells = 0;
  bool l2_normalized = false;
};

inline Eigen::Index pyramid_cell_count(const std::vector<int>& grids) {
  Eigen::Index cells = 0;
  for (int g : grids) cells += static_cast<Eigen::Index>(g) * g;
  return cells;
}

/// (Σ g²) · p(p+1)/2.
inline Eigen::Index descriptor_length(Eigen::Index code_width, const std::vector<int>& grids) {
  return pyramid_cell_count(grids) * upper_triangle_size(code_width);
}

/// Cell of patch-grid coordinate i along an axis with `extent` positions.
inline int pyramid_cell(int i, int g, int extent) {
  const auto c = static_cast<int>((static_cast<long long>(i) * g) / extent);
  return std::min(c, g - 1);
}

namespace detail {

// acc(a, b) += f_a f_b on the upper triangle (b >= a).
inline void accumulate_outer_upper(Matrix& acc, const double* f) {
  const Eigen::Index p = acc.rows();
  for (Eigen::Index a = 0; a < p; ++a) {
    const double fa = f[a];
    if (fa == 0.0) continue;
    for (Eigen::Index b = a; b < p; ++b) acc(a, b) += fa * f[b];
  }
}

inline Matrix finish_cell(Matrix acc, Eigen::Index count, double eps) {
  const Eigen::Index p = acc.rows();
  if (count > 0) acc /= static_cast<double>(count);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a + 1; b < p; ++b) acc(b, a) = acc(a, b);
  acc.diagonal().array() += eps;
  return acc;
}

}  // namespace detail

/// Second-order average pool of the listed rows of `codes` plus eps·I.
/// Rows are summed in ascending index order whatever order they are given
/// in; an empty region yields eps·I.
inline Matrix pool_cell(const RowMatrix& codes, std::vector<Eigen::Index> rows, double eps) {
  std::sort(rows.begin(), rows.end());
  Matrix acc = Matrix::Zero(codes.cols(), codes.cols());
  for (Eigen::Index r : rows) {
    if (r < 0 || r >= codes.rows()) throw Error("pooling", "feature index out of range");
    detail::accumulate_outer_upper(acc, codes.row(r).data());
  }
  return detail::finish_cell(std::move(acc), static_cast<Eigen::Index>(rows.size()), eps);
}

/// Pools every row of `codes`.
inline Matrix pool_cell(const RowMatrix& codes, double eps) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(codes.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return pool_cell(codes, std::move(rows), eps);
}

/// Pools each pyramid cell, maps it through log_spd and concatenates the
/// √2-scaled upper triangles in (grid, cell row-major) order.
inline PooledDescriptor pool_pyramid(const RowMatrix& codes, std::span<const std::pair<int, int>> coords,
                                     int grid_rows, int grid_cols, const PyramidConfig& cfg) {
  cfg.validate();
  if (codes.rows() == 0) throw Error("pooling", "no features to pool");
  if (static_cast<std::size_t>(codes.rows()) != coords.size())
    throw Error("pooling", "feature count does not match grid coordinate count");
  if (grid_rows <= 0 || grid_cols <= 0) throw Error("pooling", "patch grid must be non-empty");
  const Eigen::Index p = codes.cols();
  const Eigen::Index tri = upper_triangle_size(p);

  PooledDescriptor out;
  out.code_width = p;
  out.cells = pyramid_cell_count(cfg.grids);
  out.values.resize(out.cells * tri);

  Eigen::Index cell_offset = 0;
  for (int g : cfg.grids) {
    const auto ncell = static_cast<std::size_t>(g) * static_cast<std::size_t>(g);
    std::vector<Matrix> acc(ncell, Matrix::Zero(p, p));
    std::vector<Eigen::Index> count(ncell, 0);
    for (Eigen::Index k = 0; k < codes.rows(); ++k) {
      const auto [i, j] = coords[static_cast<std::size_t>(k)];
      if (i < 0 || i >= grid_rows || j < 0 || j >= grid_cols)
        throw Error("pooling", "grid coordinate outside the patch grid");
      const auto cell = static_cast<std::size_t>(pyramid_cell(i, g, grid_rows)) * g +
                        static_cast<std::size_t>(pyramid_cell(j, g, grid_cols));
      detail::accumulate_outer_upper(acc[cell], codes.row(k).data());
      ++count[cell];
    }
    for (std::size_t c = 0; c < ncell; ++c) {
      const Matrix pooled = detail::finish_cell(std::move(acc[c]), count[c], cfg.eps_spd);
      const std::string context = "grid " + std::to_string(g) + "x" + std::to_string(g) + " cell (" +
                                  std::to_string(c / g) + "," + std::to_string(c % g) + ")";
      const Matrix logm = log_spd(pooled, context);
      vectorize_upper(logm, out.values.segment((cell_offset + static_cast<Eigen::Index>(c)) * tri, tri));
    }
    cell_offset += static_cast<Eigen::Index>(ncell);
  }
  if (cfg.l2_normalize) {
    const double norm = out.values.norm();
    if (norm > 0.0) out.values /= norm;
    out.l2_normalized = true;
  }
  if (!out.values.allFinite()) throw Error("pooling", "descriptor has non-finite entries");
  return out;
}

// ---------------------------------------------------------------------------
// Descriptor interchange file: "SOPD", u32 version, u32 code width,
// u32 cell count, then cells·p(p+1)/2 little-endian float32 values.

inline constexpr std::uint32_t kDescriptorVersion = 1;

inline void write_descriptor(std::ostream& out, const PooledDescriptor& d) {
  io::put_magic(out, "SOPD");
  io::put_u32(out, kDescriptorVersion);
  io::put_u32(out, static_cast<std::uint32_t>(d.code_width));
  io::put_u32(out, static_cast<std::uint32_t>(d.cells));
  for (Eigen::Index i = 0; i < d.values.size(); ++i) io::put_f32(out, static_cast<float>(d.values(i)));
  if (!out) throw Error("pooling", "descriptor write failed");
}

inline PooledDescriptor read_descriptor(std::istream& in) {
  io::expect_magic(in, "SOPD", "descriptor");
  const std::uint32_t version = io::get_u32(in);
  if (version != kDescriptorVersion) throw Error("pooling", "unsupported descriptor version " + std::to_string(version));
  PooledDescriptor d;
  d.code_width = io::get_u32(in);
  d.cells = io::get_u32(in);
  d.values.resize(d.cells * upper_triangle_size(d.code_width));
  for (Eigen::Index i = 0; i < d.values.size(); ++i) d.values(i) = io::get_f32(in);
  return d;
}

}  // namespace sopool
