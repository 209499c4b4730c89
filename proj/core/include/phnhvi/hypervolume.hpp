#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "phnhvi/linalg.hpp"

namespace phnhvi::hypervolume {

using numerics::Matrix;

/// Objective vectors are rows of a Matrix (one loss vector per row); all
/// objectives are minimized and the reference point bounds the region from above.
inline constexpr std::size_t kMinObjectives = 2;
inline constexpr std::size_t kMaxObjectives = 8;

/// a <= b componentwise with a != b.
bool dominates(std::span<const double> a, std::span<const double> b);
/// Every coordinate of a is strictly below the matching coordinate of ref.
bool strictly_dominates(std::span<const double> a, std::span<const double> ref);

/// mask[i] is true iff no other row dominates row i. Identical rows do not
/// dominate each other, so duplicates are all kept.
std::vector<bool> filter_nondominated(const Matrix& points);

/// Lebesgue measure of the union of boxes [point_i, ref]. Points with any
/// coordinate at or beyond ref contribute nothing.
/// Throws DimensionError when the column count differs from ref or lies
/// outside [2, 8], NumericError on non-finite input.
double hv(const Matrix& points, std::span<const double> ref);

/// dHV/dy for every coordinate of every point (same shape as `points`).
/// Rows of dominated points and of points not strictly dominating ref are
/// zero; all other entries are <= 0. At ties only points strictly better in
/// the differentiated coordinate shadow the box face.
Matrix hv_gradient(const Matrix& points, std::span<const double> ref);

/// Points with their nondominance flags, reference point, and hypervolume.
struct FrontSet {
  Matrix points;
  std::vector<double> ref;
  std::vector<bool> nondominated;
  double hv = 0.0;

  static FrontSet make(Matrix points, std::vector<double> ref);
  /// Rows flagged nondominated, in original order.
  Matrix nondominated_points() const;
};

}  // namespace phnhvi::hypervolume
