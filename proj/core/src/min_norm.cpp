#include <algorithm>
#include <cmath>

#include "phnhvi/error.hpp"
#include "phnhvi/solver.hpp"

namespace phnhvi::solver {

namespace {

constexpr double kGapTolerance = 1e-10;
constexpr std::size_t kMaxIterations = 200000;

std::vector<double> combine(const Matrix& g, const std::vector<double>& w) {
  std::vector<double> out(g.cols(), 0.0);
  for (std::size_t k = 0; k < g.rows(); ++k) {
    if (w[k] != 0.0) numerics::axpy(w[k], g.row(k), out);
  }
  return out;
}

MinNormResult two_point(const Matrix& g) {
  double diff2 = 0.0;
  double num = 0.0;
  for (std::size_t c = 0; c < g.cols(); ++c) {
    const double d = g(1, c) - g(0, c);
    diff2 += d * d;
    num += d * g(1, c);
  }
  const double gamma = diff2 > 0.0 ? std::clamp(num / diff2, 0.0, 1.0) : 0.5;
  MinNormResult r;
  r.weights = {gamma, 1.0 - gamma};
  r.vector = combine(g, r.weights);
  r.iterations = 1;
  return r;
}

}  // namespace

MinNormResult min_norm_convex_hull(const Matrix& gradients) {
  const std::size_t n = gradients.rows();
  if (n == 0 || gradients.cols() == 0) throw DimensionError("min_norm_convex_hull: empty input");
  if (!numerics::all_finite(gradients.data())) {
    throw NumericError("min_norm_convex_hull: non-finite gradient");
  }
  if (n == 1) {
    MinNormResult r;
    r.weights = {1.0};
    r.vector.assign(gradients.row(0).begin(), gradients.row(0).end());
    return r;
  }
  if (n == 2) return two_point(gradients);

  const Matrix gram = numerics::gram(gradients);
  double scale = 1.0;
  for (std::size_t k = 0; k < n; ++k) scale = std::max(scale, gram(k, k));
  const double tol = kGapTolerance * scale;

  // Start at the vertex with the smallest norm.
  std::vector<double> w(n, 0.0);
  std::size_t start = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (gram(k, k) < gram(start, start)) start = k;
  }
  w[start] = 1.0;
  std::vector<double> gw(gram.row(start).begin(), gram.row(start).end());  // G w

  MinNormResult result;
  double gap = 0.0;
  std::size_t it = 0;
  for (; it < kMaxIterations; ++it) {
    const double quad = numerics::dot(w, gw);
    std::size_t s = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (gw[k] < gw[s]) s = k;
    }
    std::size_t a = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (w[k] > 0.0 && (a == n || gw[k] > gw[a])) a = k;
    }
    gap = 2.0 * (quad - gw[s]);
    if (gap <= tol) break;
    const double away_gap = 2.0 * (gw[a] - quad);

    // Direction d = e_to - e_from scaled along the segment; both variants are
    // moves of mass between one vertex and the current point.
    std::vector<double> d(n);
    double max_step = 1.0;
    if (gap >= away_gap) {
      for (std::size_t k = 0; k < n; ++k) d[k] = -w[k];
      d[s] += 1.0;
    } else {
      for (std::size_t k = 0; k < n; ++k) d[k] = w[k];
      d[a] -= 1.0;
      max_step = w[a] / (1.0 - w[a]);
    }
    const auto gd = numerics::matvec(gram, d);
    const double curvature = numerics::dot(d, gd);
    const double slope = numerics::dot(d, gw);
    double step = curvature > 0.0 ? -slope / curvature : max_step;
    step = std::clamp(step, 0.0, max_step);
    if (step == 0.0) break;
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = std::max(0.0, w[k] + step * d[k]);
      gw[k] += step * gd[k];
    }
    if (step == max_step && gap < away_gap) w[a] = 0.0;
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    // Refresh G w occasionally to stop drift.
    if (it % 64 == 63) gw = numerics::matvec(gram, w);
  }
  result.weights = std::move(w);
  result.vector = combine(gradients, result.weights);
  result.iterations = it;
  result.duality_gap = gap;
  return result;
}

}  // namespace phnhvi::solver
