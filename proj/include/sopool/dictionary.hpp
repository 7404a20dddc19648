#pragma once

// K-means dictionary learning over whitened patches.

#include "common.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace sopool {

/// K atoms, one per row.
struct Dictionary {
  RowMatrix atoms;

  Eigen::Index size() const { return atoms.rows(); }
  Eigen::Index dim() const { return atoms.cols(); }
};

struct KMeansResult {
  RowMatrix centroids;
  std::vector<int> assignment;
  std::vector<double> objective;  // sum of squared distances, one per assignment step
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr Eigen::Index kKMeansChunk = 4096;

inline double squared_distance(const double* a, const double* b, Eigen::Index dim) {
  double acc = 0.0;
  for (Eigen::Index t = 0; t < dim; ++t) {
    const double d = a[t] - b[t];
    acc += d * d;
  }
  return acc;
}

// Nearest centroid per point (ties go to the lowest index). Candidates are
// screened with a blocked ‖x‖² − 2x·c + ‖c‖² product; every centroid within
// a roundoff margin of the screened minimum is then re-scored with the
// direct squared difference, so the choice is exact. Chunks have a fixed
// size and each point is handled independently.
inline void assign_points(const RowMatrix& x, const RowMatrix& c, std::vector<int>& label,
                          std::vector<double>& dist) {
  const Eigen::Index n = x.rows(), k = c.rows(), dim = x.cols();
  const Vector c_norm = c.rowwise().squaredNorm();
  const double c_max = c_norm.maxCoeff();
  const auto chunks = static_cast<std::size_t>((n + kKMeansChunk - 1) / kKMeansChunk);
  parallel_for(chunks, [&](std::size_t chunk) {
    const Eigen::Index begin = static_cast<Eigen::Index>(chunk) * kKMeansChunk;
    const Eigen::Index rows = std::min(n, begin + kKMeansChunk) - begin;
    const auto block = x.middleRows(begin, rows);
    const Vector x_norm = block.rowwise().squaredNorm();
    RowMatrix screen = block * c.transpose();
    screen = ((-2.0 * screen).colwise() + x_norm).rowwise() + c_norm.transpose();
    const Vector screened = screen.rowwise().minCoeff();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = begin + r;
      const double cutoff = screened(r) + 1e-9 * (x_norm(r) + c_max) + 1e-300;
      const double* xi = x.row(i).data();
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < k; ++j) {
        if (screen(r, j) > cutoff) continue;
        const double d = squared_distance(xi, c.row(j).data(), dim);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(j);
        }
      }
      label[static_cast<std::size_t>(i)] = best;
      dist[static_cast<std::size_t>(i)] = best_d;
    }
  });
}

// K-means++ seeding: first centre uniform, then proportional to D².
inline RowMatrix kmeans_plus_plus(const RowMatrix& x, Eigen::Index k, CounterRng& rng) {
  const Eigen::Index n = x.rows(), dim = x.cols();
  RowMatrix c(k, dim);
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    d2[static_cast<std::size_t>(i)] = squared_distance(x.row(i).data(), c.row(0).data(), dim);
  for (Eigen::Index j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) {
      throw Error("dictionary", "fewer than K=" + std::to_string(k) + " distinct patches in the sample");
    }
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = d2[static_cast<std::size_t>(i)];
      if (v <= 0.0) continue;
      acc += v;
      pick = i;
      if (acc > target) break;
    }
    c.row(j) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = squared_distance(x.row(i).data(), c.row(j).data(), dim);
      auto& slot = d2[static_cast<std::size_t>(i)];
      slot = std::min(slot, d);
    }
  }
  return c;
}

}  // namespace detail

/// Lloyd's algorithm from a K-means++ start. Stops when no centroid moves
/// more than `tol` in max-norm or after `max_iters` updates. A cluster
/// that empties is re-seeded at the point farthest from its centroid.
inline KMeansResult kmeans(const RowMatrix& x, Eigen::Index k, int max_iters, std::uint64_t seed,
                           double tol = 1e-6) {
  if (k <= 0) throw Error("dictionary", "K must be positive");
  if (x.rows() < k) {
    throw Error("dictionary", "need at least K=" + std::to_string(k) + " patches, got " +
                                  std::to_string(x.rows()));
  }
  if (max_iters < 0) throw Error("dictionary", "iteration count must be non-negative");
  const Eigen::Index n = x.rows(), dim = x.cols();
  CounterRng rng(combine_keys(seed, hash_string("kmeans")));

  KMeansResult res;
  res.centroids = detail::kmeans_plus_plus(x, k, rng);
  res.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k));
  RowMatrix sums(k, dim);

  auto assign = [&] {
    detail::assign_points(x, res.centroids, res.assignment, dist);
    double obj = 0.0;
    for (double d : dist) obj += d;
    res.objective.push_back(obj);
  };

  assign();
  for (int it = 0; it < max_iters; ++it) {
    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = res.assignment[static_cast<std::size_t>(i)];
      sums.row(a) += x.row(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    RowMatrix next(k, dim);
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto cnt = counts[static_cast<std::size_t>(j)];
      if (cnt > 0) {
        next.row(j) = sums.row(j) / static_cast<double>(cnt);
        continue;
      }
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (!taken[ui] && dist[ui] > far_d) {
          far_d = dist[ui];
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = 1;
      next.row(j) = x.row(far);
    }
    const double moved = (next - res.centroids).cwiseAbs().maxCoeff();
    res.centroids = std::move(next);
    res.iterations = it + 1;
    assign();
    if (moved < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// K-means dictionary: centroids (optionally unit-normalized) sorted
/// lexicographically.
inline Dictionary train_kmeans(const RowMatrix& patches, Eigen::Index k, int iters, std::uint64_t seed,
                               bool normalize_atoms = true) {
  KMeansResult res = kmeans(patches, k, iters, seed);
  RowMatrix c = std::move(res.centroids);
  if (normalize_atoms) {
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double norm = c.row(j).norm();
      if (!(norm > 0.0)) throw Error("dictionary", "zero-norm centroid cannot be normalized");
      c.row(j) /= norm;
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(c.rows()));
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<Eigen::Index>(j);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::lexicographical_compare(c.row(a).data(), c.row(a).data() + c.cols(), c.row(b).data(),
                                        c.row(b).data() + c.cols());
  });
  Dictionary dict;
  dict.atoms.resize(c.rows(), c.cols());
  for (std::size_t j = 0; j < order.size(); ++j) dict.atoms.row(static_cast<Eigen::Index>(j)) = c.row(order[j]);
  return dict;
}

}  // namespace sopool
