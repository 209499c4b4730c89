#include "phnhvi/hypervolume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phnhvi/error.hpp"

namespace phnhvi::hypervolume {
namespace {

using Point = std::vector<double>;

void validate(const Matrix& points, std::span<const double> ref) {
  const std::size_t dim = ref.size();
  if (dim < kMinObjectives || dim > kMaxObjectives) {
    throw DimensionError("hypervolume: " + std::to_string(dim) +
                         " objectives, supported range is [2, 8]");
  }
  if (points.rows() > 0 && points.cols() != dim) {
    throw DimensionError("hypervolume: points have " + std::to_string(points.cols()) +
                         " objectives, reference point has " + std::to_string(dim));
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (!std::isfinite(ref[j])) throw NumericError("hypervolume: non-finite reference point", j);
  }
  const auto data = points.data();
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!std::isfinite(data[k])) {
      throw NumericError("hypervolume: non-finite coordinate in point " +
                             std::to_string(k / dim),
                         static_cast<std::ptrdiff_t>(k / dim));
    }
  }
}

bool point_dominates(const Point& a, const Point& b) {
  bool strictly = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
    if (a[j] < b[j]) strictly = true;
  }
  return strictly;
}

// Drops dominated points and exact duplicates (duplicates add no volume).
std::vector<Point> nondominated_unique(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Point> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t k = 0; k < pts.size() && !dominated; ++k) {
      if (k != i && point_dominates(pts[k], pts[i])) dominated = true;
    }
    if (!dominated) out.push_back(pts[i]);
  }
  return out;
}

double box_volume(const Point& p, std::span<const double> ref) {
  double v = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) v *= ref[j] - p[j];
  return v;
}

double hv_2d(std::vector<Point> pts, std::span<const double> ref) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double prev_y = ref[1];
  for (const auto& p : pts) {
    if (p[1] < prev_y) {
      area += (ref[0] - p[0]) * (prev_y - p[1]);
      prev_y = p[1];
    }
  }
  return area;
}

// Slices along z: between consecutive z levels the cross-section is the 2-D
// hypervolume of every point at or below the slice.
double hv_3d(std::vector<Point> pts, std::span<const double> ref) {
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a[2] < b[2]; });
  double volume = 0.0;
  std::vector<Point> active;
  active.reserve(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    active.push_back(pts[k]);
    const double z_next = k + 1 < pts.size() ? pts[k + 1][2] : ref[2];
    const double height = z_next - pts[k][2];
    if (height > 0.0) volume += height * hv_2d(active, ref.first(2));
  }
  return volume;
}

// Points must all strictly dominate ref.
double hv_recursive(std::vector<Point> pts, std::span<const double> ref) {
  if (pts.empty()) return 0.0;
  const std::size_t dim = ref.size();
  if (dim == 1) {
    double lo = pts.front()[0];
    for (const auto& p : pts) lo = std::min(lo, p[0]);
    return ref[0] - lo;
  }
  if (dim == 2) return hv_2d(std::move(pts), ref);
  if (pts.size() == 1) return box_volume(pts.front(), ref);
  if (dim == 3) return hv_3d(std::move(pts), ref);

  // Exclusive-contribution recursion: HV(S) = sum_i [box(p_i) - HV(limit(p_i, S_{>i}))],
  // with S sorted by the last coordinate so limit sets stay small.
  pts = nondominated_unique(std::move(pts));
  std::sort(pts.begin(), pts.end(),
            [dim](const Point& a, const Point& b) { return a[dim - 1] < b[dim - 1]; });
  double total = 0.0;
  std::vector<Point> limit;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    limit.clear();
    for (std::size_t k = i + 1; k < pts.size(); ++k) {
      Point q(dim);
      for (std::size_t j = 0; j < dim; ++j) q[j] = std::max(pts[i][j], pts[k][j]);
      limit.push_back(std::move(q));
    }
    double shadow = 0.0;
    if (!limit.empty()) {
      shadow = hv_recursive(nondominated_unique(std::move(limit)), ref);
      limit = {};
    }
    total += box_volume(pts[i], ref) - shadow;
  }
  return total;
}

std::vector<Point> inside_points(const Matrix& points, std::span<const double> ref) {
  std::vector<Point> pts;
  pts.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto row = points.row(i);
    if (strictly_dominates(row, ref)) pts.emplace_back(row.begin(), row.end());
  }
  return pts;
}

}  // namespace

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dominates: dimension mismatch");
  bool strictly = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
    if (a[j] < b[j]) strictly = true;
  }
  return strictly;
}

bool strictly_dominates(std::span<const double> a, std::span<const double> ref) {
  if (a.size() != ref.size()) throw DimensionError("strictly_dominates: dimension mismatch");
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!(a[j] < ref[j])) return false;
  }
  return true;
}

std::vector<bool> filter_nondominated(const Matrix& points) {
  const std::size_t n = points.rows();
  std::vector<bool> mask(n, true);
  if (n == 0) return mask;
  if (points.cols() < kMinObjectives) {
    throw DimensionError("filter_nondominated: need at least 2 objectives");
  }
  if (points.cols() == 2) {
    // Lexicographic sweep: only earlier, non-identical points can dominate.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (points(a, 0) != points(b, 0)) return points(a, 0) < points(b, 0);
      if (points(a, 1) != points(b, 1)) return points(a, 1) < points(b, 1);
      return a < b;
    });
    double best_y = std::numeric_limits<double>::infinity();
    std::size_t g = 0;
    while (g < n) {
      std::size_t end = g + 1;
      while (end < n && points(order[end], 0) == points(order[g], 0) &&
             points(order[end], 1) == points(order[g], 1)) {
        ++end;
      }
      const double y = points(order[g], 1);
      const bool dominated = best_y <= y;
      for (std::size_t k = g; k < end; ++k) mask[order[k]] = !dominated;
      best_y = std::min(best_y, y);
      g = end;
    }
    return mask;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i && dominates(points.row(k), points.row(i))) {
        mask[i] = false;
        break;
      }
    }
  }
  return mask;
}

double hv(const Matrix& points, std::span<const double> ref) {
  validate(points, ref);
  auto pts = inside_points(points, ref);
  if (pts.empty()) return 0.0;
  if (ref.size() > 2) pts = nondominated_unique(std::move(pts));
  return hv_recursive(std::move(pts), ref);
}

Matrix hv_gradient(const Matrix& points, std::span<const double> ref) {
  validate(points, ref);
  const std::size_t n = points.rows();
  const std::size_t dim = ref.size();
  Matrix grad(n, dim, 0.0);
  if (n == 0) return grad;
  const auto mask = filter_nondominated(points);

  std::vector<double> sub_ref(dim - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto yi = points.row(i);
    if (!mask[i] || !strictly_dominates(yi, ref)) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      // Face of box i orthogonal to axis j, minus the part shadowed by points
      // strictly better in coordinate j.
      double face = 1.0;
      for (std::size_t c = 0, s = 0; c < dim; ++c) {
        if (c == j) continue;
        sub_ref[s++] = ref[c];
        face *= ref[c] - yi[c];
      }
      std::vector<Point> shadow;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        const auto yk = points.row(k);
        if (!(yk[j] < yi[j])) continue;
        Point q(dim - 1);
        bool inside = true;
        for (std::size_t c = 0, s = 0; c < dim; ++c) {
          if (c == j) continue;
          q[s] = std::max(yk[c], yi[c]);
          if (!(q[s] < sub_ref[s])) inside = false;
          ++s;
        }
        if (inside) shadow.push_back(std::move(q));
      }
      double covered = 0.0;
      if (!shadow.empty()) {
        if (dim - 1 > 2) shadow = nondominated_unique(std::move(shadow));
        covered = hv_recursive(std::move(shadow), sub_ref);
      }
      grad(i, j) = -(face - covered);
    }
  }
  return grad;
}

FrontSet FrontSet::make(Matrix points, std::vector<double> ref) {
  FrontSet f;
  f.hv = hypervolume::hv(points, ref);
  f.nondominated = filter_nondominated(points);
  f.points = std::move(points);
  f.ref = std::move(ref);
  return f;
}

Matrix FrontSet::nondominated_points() const {
  std::vector<double> data;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    if (!nondominated[i]) continue;
    const auto r = points.row(i);
    data.insert(data.end(), r.begin(), r.end());
    ++rows;
  }
  return Matrix(rows, points.cols(), std::move(data));
}

}  // namespace phnhvi::hypervolume
