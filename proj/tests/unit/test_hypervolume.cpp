#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "phnhvi/error.hpp"
#include "phnhvi/hypervolume.hpp"
#include "phnhvi/rng.hpp"
#include "test_util.hpp"

namespace phnhvi::hypervolume {
namespace {

using numerics::Matrix;
using numerics::Rng;
using phnhvi::testing::rel_err;

Matrix mat(std::size_t cols, std::initializer_list<double> v) {
  return Matrix(v.size() / cols, cols, std::vector<double>(v));
}

Matrix random_points(Rng& rng, std::size_t n, std::size_t dim, double lo = 0.0, double hi = 2.0) {
  Matrix m(n, dim);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

// Exact HV by coordinate compression: every cell of the grid spanned by the
// point coordinates is either fully dominated or not at all.
double grid_hv(const Matrix& pts, const std::vector<double>& ref) {
  const std::size_t dim = ref.size();
  std::vector<std::vector<double>> axes(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      if (pts(i, j) < ref[j]) axes[j].push_back(pts(i, j));
    }
    axes[j].push_back(ref[j]);
    std::sort(axes[j].begin(), axes[j].end());
    axes[j].erase(std::unique(axes[j].begin(), axes[j].end()), axes[j].end());
  }
  std::vector<std::size_t> idx(dim, 0);
  double total = 0.0;
  while (true) {
    bool valid = true;
    for (std::size_t j = 0; j < dim; ++j) valid = valid && idx[j] + 1 < axes[j].size();
    if (valid) {
      bool covered = false;
      for (std::size_t i = 0; i < pts.rows() && !covered; ++i) {
        bool dom = true;
        for (std::size_t j = 0; j < dim && dom; ++j) dom = pts(i, j) <= axes[j][idx[j]];
        covered = dom;
      }
      if (covered) {
        double vol = 1.0;
        for (std::size_t j = 0; j < dim; ++j) vol *= axes[j][idx[j] + 1] - axes[j][idx[j]];
        total += vol;
      }
    }
    std::size_t j = 0;
    while (j < dim && ++idx[j] >= axes[j].size()) idx[j++] = 0;
    if (j == dim) break;
  }
  return total;
}

std::vector<bool> brute_force_mask(const Matrix& pts) {
  std::vector<bool> mask(pts.rows(), true);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    for (std::size_t k = 0; k < pts.rows(); ++k) {
      if (k != i && dominates(pts.row(k), pts.row(i))) mask[i] = false;
    }
  }
  return mask;
}

TEST(Dominance, Basics) {
  const std::vector<double> a{1, 1};
  const std::vector<double> b{2, 2};
  const std::vector<double> c{1, 2};
  EXPECT_TRUE(dominates(a, b));
  EXPECT_TRUE(dominates(a, c));
  EXPECT_FALSE(dominates(a, a));
  EXPECT_TRUE(strictly_dominates(a, b));
  EXPECT_FALSE(strictly_dominates(a, c));
}

TEST(FilterNondominated, IncomparablePair) {
  EXPECT_EQ(filter_nondominated(mat(2, {1, 0, 0, 1})), (std::vector<bool>{true, true}));
}

TEST(FilterNondominated, DominatedPair) {
  EXPECT_EQ(filter_nondominated(mat(2, {1, 1, 2, 2})), (std::vector<bool>{true, false}));
}

TEST(FilterNondominated, DuplicatesBothKept) {
  EXPECT_EQ(filter_nondominated(mat(2, {1, 1, 1, 1, 0, 3})), (std::vector<bool>{true, true, true}));
}

TEST(FilterNondominated, MatchesBruteForce) {
  Rng rng(17);
  for (std::size_t dim : {2u, 3u, 4u}) {
    for (int trial = 0; trial < 10; ++trial) {
      auto pts = random_points(rng, 100, dim);
      EXPECT_EQ(filter_nondominated(pts), brute_force_mask(pts)) << "dim " << dim;
    }
  }
  // Ties on a coarse lattice exercise the equal-coordinate paths.
  for (std::size_t dim : {2u, 3u}) {
    Matrix pts(60, dim);
    for (double& v : pts.data()) v = static_cast<double>(rng.below(4));
    EXPECT_EQ(filter_nondominated(pts), brute_force_mask(pts));
  }
}

TEST(Hypervolume, TwoRectangles) {
  EXPECT_DOUBLE_EQ(hv(mat(2, {1, 0, 0, 1}), std::vector<double>{2, 2}), 3.0);
}

TEST(Hypervolume, SingleBox) {
  EXPECT_DOUBLE_EQ(hv(mat(2, {0.5, 0.5}), std::vector<double>{2, 2}), 2.25);
}

TEST(Hypervolume, EmptyAndOutside) {
  EXPECT_EQ(hv(Matrix(0, 3), std::vector<double>{1, 1, 1}), 0.0);
  EXPECT_EQ(hv(mat(2, {3, 0, 2, 1}), std::vector<double>{2, 2}), 0.0);
}

TEST(Hypervolume, RejectsBadInput) {
  EXPECT_THROW(hv(mat(2, {1, 1}), std::vector<double>{2, 2, 2}), DimensionError);
  EXPECT_THROW(hv(mat(2, {std::nan(""), 1}), std::vector<double>{2, 2}), NumericError);
}

TEST(Hypervolume, MatchesGridOracle) {
  Rng rng(23);
  for (std::size_t dim = 2; dim <= 5; ++dim) {
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t n = 1 + rng.below(dim <= 4 ? 12 : 8);
      auto pts = random_points(rng, n, dim, 0.0, 2.3);
      const std::vector<double> ref(dim, 2.0);
      EXPECT_NEAR(hv(pts, ref), grid_hv(pts, ref), 1e-12) << "dim " << dim << " n " << n;
    }
  }
}

TEST(Hypervolume, MatchesGridOracleWithTies) {
  Rng rng(29);
  for (std::size_t dim = 2; dim <= 4; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      Matrix pts(10, dim);
      for (double& v : pts.data()) v = 0.25 * static_cast<double>(rng.below(8));
      const std::vector<double> ref(dim, 2.0);
      EXPECT_NEAR(hv(pts, ref), grid_hv(pts, ref), 1e-12);
    }
  }
}

TEST(Hypervolume, MonteCarloAgreement) {
  Rng rng(31);
  for (int set = 0; set < 20; ++set) {
    const std::size_t dim = 2 + rng.below(3);
    const std::size_t n = 1 + rng.below(8);
    auto pts = random_points(rng, n, dim);
    const std::vector<double> ref(dim, 2.0);
    const double box = std::pow(2.0, static_cast<double>(dim));
    const int samples = 1000000;
    int hits = 0;
    std::vector<double> z(dim);
    for (int s = 0; s < samples; ++s) {
      for (double& v : z) v = rng.uniform(0.0, 2.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (dominates(pts.row(i), z)) {
          ++hits;
          break;
        }
      }
    }
    const double frac = static_cast<double>(hits) / samples;
    const double se = box * std::sqrt(frac * (1 - frac) / samples);
    EXPECT_LE(std::abs(hv(pts, ref) - box * frac), 3.0 * se + 1e-12) << "set " << set;
  }
}

TEST(Hypervolume, Invariances) {
  Rng rng(37);
  for (std::size_t dim = 2; dim <= 4; ++dim) {
    auto pts = random_points(rng, 9, dim);
    const std::vector<double> ref(dim, 2.0);
    const double base = hv(pts, ref);
    // Dominance invariance.
    const auto mask = filter_nondominated(pts);
    std::vector<double> kept;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      if (mask[i]) kept.insert(kept.end(), pts.row(i).begin(), pts.row(i).end());
    }
    EXPECT_DOUBLE_EQ(hv(Matrix(kept.size() / dim, dim, kept), ref), base);
    // Permutation and duplicate invariance.
    Matrix perm(pts.rows() + 1, dim);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      const auto src = pts.row(pts.rows() - 1 - i);
      std::copy(src.begin(), src.end(), perm.row(i).begin());
    }
    std::copy(pts.row(0).begin(), pts.row(0).end(), perm.row(pts.rows()).begin());
    EXPECT_NEAR(hv(perm, ref), base, 1e-12);
    // Translation consistency.
    Matrix shifted = pts;
    std::vector<double> shifted_ref = ref;
    for (std::size_t j = 0; j < dim; ++j) {
      shifted_ref[j] += 0.75 * (j + 1);
      for (std::size_t i = 0; i < pts.rows(); ++i) shifted(i, j) += 0.75 * (j + 1);
    }
    EXPECT_NEAR(hv(shifted, shifted_ref), base, 1e-12);
  }
}

TEST(Hypervolume, Monotonicity) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 2 + rng.below(3);
    auto pts = random_points(rng, 6, dim);
    const std::vector<double> ref(dim, 2.0);
    const double base = hv(pts, ref);
    Matrix more(pts.rows() + 1, dim);
    std::copy(pts.data().begin(), pts.data().end(), more.data().begin());
    for (std::size_t j = 0; j < dim; ++j) more(pts.rows(), j) = rng.uniform(0.0, 2.5);
    EXPECT_GE(hv(more, ref), base - 1e-15);

    // A strict Pareto improvement of a nondominated point inside the box
    // strictly increases HV.
    const auto mask = filter_nondominated(pts);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      if (!mask[i] || !strictly_dominates(pts.row(i), ref)) continue;
      Matrix better = pts;
      for (std::size_t j = 0; j < dim; ++j) better(i, j) -= 0.01;
      EXPECT_GT(hv(better, ref), base);
      break;
    }
  }
}

TEST(HypervolumeGradient, SinglePoint) {
  const auto g = hv_gradient(mat(2, {0.5, 0.5}), std::vector<double>{2, 2});
  EXPECT_DOUBLE_EQ(g(0, 0), -1.5);
  EXPECT_DOUBLE_EQ(g(0, 1), -1.5);
}

TEST(HypervolumeGradient, TwoPointSweep) {
  const auto g = hv_gradient(mat(2, {1, 0, 0, 1}), std::vector<double>{2, 2});
  // Each point owns a unit square exclusively; every face has length 1.
  EXPECT_DOUBLE_EQ(g(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(g(1, 1), -1.0);
  EXPECT_DOUBLE_EQ(g(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(g(0, 1), -1.0);
}

TEST(HypervolumeGradient, DominatedAndOutsideRowsAreZero) {
  const auto g = hv_gradient(mat(2, {0.5, 0.5, 1, 1, 3, 0.1}), std::vector<double>{2, 2});
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(g(1, j), 0.0);
    EXPECT_EQ(g(2, j), 0.0);
  }
}

TEST(HypervolumeGradient, DuplicatesShareRow) {
  const auto g = hv_gradient(mat(2, {0.5, 1, 0.5, 1, 1, 0.2}), std::vector<double>{2, 2});
  EXPECT_EQ(g(0, 0), g(1, 0));
  EXPECT_EQ(g(0, 1), g(1, 1));
  EXPECT_LT(g(0, 0), 0.0);
}

// Random mutually nondominated points with coordinate gaps of at least
// `gap` in every axis, so no box face coincides with another within h.
Matrix separated_front(Rng& rng, std::size_t n, std::size_t dim, double gap) {
  while (true) {
    auto pts = random_points(rng, n, dim, 0.1, 1.9);
    bool ok = true;
    for (std::size_t j = 0; j < dim && ok; ++j) {
      for (std::size_t a = 0; a < n && ok; ++a) {
        for (std::size_t b = a + 1; b < n && ok; ++b) ok = std::abs(pts(a, j) - pts(b, j)) >= gap;
      }
    }
    if (!ok) continue;
    const auto mask = filter_nondominated(pts);
    if (std::all_of(mask.begin(), mask.end(), [](bool b) { return b; })) return pts;
  }
}

TEST(HypervolumeGradient, MatchesFiniteDifferences) {
  Rng rng(43);
  const double h = 1e-6;
  for (std::size_t dim = 2; dim <= 4; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 2 + rng.below(dim == 2 ? 7 : 5);
      auto pts = separated_front(rng, n, dim, 1e-3);
      const std::vector<double> ref(dim, 2.0);
      const auto g = hv_gradient(pts, ref);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
          Matrix plus = pts;
          Matrix minus = pts;
          plus(i, j) += h;
          minus(i, j) -= h;
          const double fd = (hv(plus, ref) - hv(minus, ref)) / (2 * h);
          EXPECT_LE(rel_err(fd, g(i, j)), 1e-5) << "dim " << dim << " i " << i << " j " << j;
          EXPECT_LE(g(i, j), 0.0);
        }
      }
    }
  }
}

TEST(FrontSetTest, Make) {
  auto f = FrontSet::make(mat(2, {1, 0, 0, 1, 1, 1}), {2, 2});
  EXPECT_DOUBLE_EQ(f.hv, 3.0);
  EXPECT_EQ(f.nondominated, (std::vector<bool>{true, true, false}));
  EXPECT_EQ(f.nondominated_points().rows(), 2u);
}

}  // namespace
}  // namespace phnhvi::hypervolume
