#include "oracles.hpp"

#include <sopool/pooling.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace sopool;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<std::pair<int, int>> grid_coords(int rows, int cols) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out.emplace_back(i, j);
  return out;
}

RowMatrix uniform_codes(Eigen::Index n, Eigen::Index p, CounterRng& rng) {
  RowMatrix c(n, p);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform01();
  return c;
}

}  // namespace

TEST(Pooling, CellWorkedExample) {
  RowMatrix codes(2, 2);
  codes << 1, 0, 0, 2;
  const Matrix f = pool_cell(codes, 0.0);
  Matrix want(2, 2);
  want << 0.5, 0, 0, 2;
  EXPECT_EQ(f, want);
  const Matrix g = pool_cell(codes, 1e-3);
  EXPECT_DOUBLE_EQ(g(0, 0), 0.501);
  EXPECT_DOUBLE_EQ(g(1, 1), 2.001);
}

TEST(Pooling, EmptyRegionIsRidgeOnly) {
  const RowMatrix codes = RowMatrix::Ones(3, 4);
  EXPECT_EQ(pool_cell(codes, {}, 1e-3), Matrix(1e-3 * Matrix::Identity(4, 4)));
}

TEST(Pooling, MatchesBruteForce) {
  CounterRng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const RowMatrix codes = oracle::random_matrix(30, 7, rng);
    std::vector<Eigen::Index> rows{3, 1, 29, 12, 7};
    EXPECT_LE(max_abs(pool_cell(codes, rows, 1e-3) - oracle::brute_force_pool(codes, rows, 1e-3)), 1e-12);
  }
}

TEST(Pooling, OutOfRangeRowIsAnError) {
  EXPECT_THROW(pool_cell(RowMatrix::Ones(3, 2), {5}, 0.0), Error);
}

TEST(Pooling, LogOfIdentityIsZero) {
  for (Eigen::Index p : {1, 5, 40}) EXPECT_LE(max_abs(log_spd(Matrix::Identity(p, p))), 1e-12);
}

TEST(Pooling, LogOfDiagonal) {
  Matrix f = Matrix::Zero(2, 2);
  f(0, 0) = std::exp(1.0);
  f(1, 1) = std::exp(2.0);
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = 1.0;
  want(1, 1) = 2.0;
  EXPECT_LE(max_abs(log_spd(f) - want), 1e-14);
}

TEST(Pooling, LogRoundTrip) {
  CounterRng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix f = oracle::random_spd(12, 1e4, rng);
    EXPECT_LE((exp_symmetric(log_spd(f)) - f).norm() / f.norm(), 1e-10);
  }
}

TEST(Pooling, LogErrorsNameTheCell) {
  Matrix f = Matrix::Identity(2, 2);
  f(1, 1) = -1.0;
  try {
    log_spd(f, "grid 2x2 cell (1,0)");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "pooling");
    EXPECT_NE(std::string(e.what()).find("grid 2x2 cell (1,0)"), std::string::npos);
  }
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_THROW(log_spd(asym), Error);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  EXPECT_THROW(log_spd(nan), Error);
  EXPECT_THROW(log_spd(Matrix::Identity(2, 3)), Error);
}

TEST(Pooling, ZeroRidgeOnRankDeficientCellFails) {
  // One feature per cell gives a rank-one matrix.
  RowMatrix codes(4, 3);
  codes.setOnes();
  const auto coords = grid_coords(2, 2);
  PyramidConfig cfg;
  cfg.grids = {2};
  cfg.eps_spd = 0.0;
  try {
    pool_pyramid(codes, coords, 2, 2, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cell (0,0)"), std::string::npos) << e.what();
  }
}

TEST(Pooling, DescriptorLengths) {
  EXPECT_EQ(descriptor_length(40, {1, 2, 4, 6, 8}), 99220);
  EXPECT_EQ(descriptor_length(36, {1, 2, 4, 6, 8}), 80586);
  EXPECT_EQ(pyramid_cell_count({1, 2, 4, 6, 8}), 121);
  EXPECT_EQ(upper_triangle_size(40), 820);
  EXPECT_EQ(upper_triangle_size(36), 666);
}

TEST(Pooling, PyramidDescriptorLayout) {
  CounterRng rng(3);
  const RowMatrix codes = uniform_codes(25, 3, rng);
  const auto coords = grid_coords(5, 5);
  PyramidConfig cfg;
  cfg.grids = {1, 2};
  cfg.l2_normalize = false;
  const PooledDescriptor d = pool_pyramid(codes, coords, 5, 5, cfg);
  ASSERT_EQ(d.values.size(), 5 * 6);
  EXPECT_EQ(d.cells, 5);
  EXPECT_FALSE(d.l2_normalized);
  // Grid 1 covers everything.
  const Vector whole = vectorize_upper(log_spd(pool_cell(codes, 1e-3)));
  EXPECT_LE((d.values.head(6) - whole).cwiseAbs().maxCoeff(), 1e-12);
  // Grid 2 cell (1,0) is the fourth cell overall.
  std::vector<Eigen::Index> rows;
  for (int k = 0; k < 25; ++k)
    if (pyramid_cell(k / 5, 2, 5) == 1 && pyramid_cell(k % 5, 2, 5) == 0) rows.push_back(k);
  ASSERT_EQ(rows.size(), 6u);  // i ∈ {3,4}, j ∈ {0,1,2}
  const Vector cell = vectorize_upper(log_spd(oracle::brute_force_pool(codes, rows, 1e-3)));
  EXPECT_LE((d.values.segment(6 * 3, 6) - cell).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pooling, L2Normalization) {
  CounterRng rng(4);
  const RowMatrix codes = uniform_codes(64, 4, rng);
  const PooledDescriptor d = pool_pyramid(codes, grid_coords(8, 8), 8, 8, PyramidConfig{});
  EXPECT_TRUE(d.l2_normalized);
  EXPECT_NEAR(d.values.norm(), 1.0, 1e-12);
  EXPECT_EQ(d.values.size(), descriptor_length(4, {1, 2, 4, 6, 8}));
}

TEST(Pooling, DescriptorFileRoundTrip) {
  CounterRng rng(5);
  const PooledDescriptor d = pool_pyramid(uniform_codes(16, 3, rng), grid_coords(4, 4), 4, 4, PyramidConfig{});
  std::stringstream ss;
  write_descriptor(ss, d);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "SOPD");
  EXPECT_EQ(bytes.size(), 16 + 4 * static_cast<std::size_t>(d.values.size()));
  const PooledDescriptor back = read_descriptor(ss);
  EXPECT_EQ(back.code_width, 3);
  EXPECT_EQ(back.cells, d.cells);
  EXPECT_LE((back.values - d.values).cwiseAbs().maxCoeff(), 1e-7);
  std::stringstream bad("SOPX");
  EXPECT_THROW(read_descriptor(bad), Error);
}

TEST(Pooling, PyramidCellEdges) {
  EXPECT_EQ(pyramid_cell(0, 6, 59), 0);
  EXPECT_EQ(pyramid_cell(58, 6, 59), 5);
  EXPECT_EQ(pyramid_cell(9, 6, 59), 0);
  EXPECT_EQ(pyramid_cell(10, 6, 59), 1);
  EXPECT_EQ(pyramid_cell(0, 8, 3), 0);
  EXPECT_EQ(pyramid_cell(2, 8, 3), 5);
}

TEST(PoolingInvariants, PooledMinusRidgeIsPsd) {
  CounterRng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform_index(12));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(60));
    const RowMatrix codes = oracle::random_matrix(n, p, rng);
    const Matrix f = pool_cell(codes, 1e-3);
    const Matrix centred = f - 1e-3 * Matrix::Identity(p, p);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(centred);
    ASSERT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(PoolingInvariants, VectorizationIsAnIsometry) {
  CounterRng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform_index(20));
    Matrix a = oracle::random_matrix(p, p, rng), b = oracle::random_matrix(p, p, rng);
    a = (a + a.transpose()).eval();
    b = (b + b.transpose()).eval();
    ASSERT_NEAR(vectorize_upper(a).dot(vectorize_upper(b)), (a * b).trace(), 1e-10);
  }
}

TEST(PoolingInvariants, PyramidCellsPartitionTheGrid) {
  for (int l : {1, 3, 7, 29, 59, 64})
    for (int g : full_pyramid()) {
      std::vector<int> population(static_cast<std::size_t>(g) * g, 0);
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
          const int ci = pyramid_cell(i, g, l), cj = pyramid_cell(j, g, l);
          ASSERT_TRUE(ci >= 0 && ci < g && cj >= 0 && cj < g);
          ++population[static_cast<std::size_t>(ci) * g + cj];
        }
      int total = 0;
      for (int c : population) total += c;
      ASSERT_EQ(total, l * l);
    }
}

TEST(PoolingInvariants, PermutationLeavesCellBitIdentical) {
  CounterRng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const RowMatrix codes = oracle::random_matrix(40, 6, rng);
    std::vector<Eigen::Index> rows(40);
    for (Eigen::Index k = 0; k < 40; ++k) rows[static_cast<std::size_t>(k)] = k;
    const Matrix sorted = pool_cell(codes, rows, 1e-3);
    for (std::size_t k = rows.size() - 1; k > 0; --k)
      std::swap(rows[k], rows[static_cast<std::size_t>(rng.uniform_index(k + 1))]);
    ASSERT_EQ(pool_cell(codes, rows, 1e-3), sorted);
  }
}

TEST(PoolingInvariants, LengthsMatchClosedForm) {
  CounterRng rng(9);
  for (std::size_t depth = 3; depth <= full_pyramid().size(); ++depth) {
    const auto grids = pyramid_of_depth(depth);
    Eigen::Index cells = 0;
    for (int g : grids) cells += g * g;
    for (Eigen::Index p : {1, 2, 5, 36, 40}) ASSERT_EQ(descriptor_length(p, grids), cells * p * (p + 1) / 2);
    // Pooling a 15×15 grid with small p produces exactly that length.
    PyramidConfig cfg;
    cfg.grids = grids;
    const RowMatrix codes = uniform_codes(225, 2, rng);
    ASSERT_EQ(pool_pyramid(codes, grid_coords(15, 15), 15, 15, cfg).values.size(), descriptor_length(2, grids));
  }
}
