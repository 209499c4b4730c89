#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "phnhvi/linalg.hpp"

namespace phnhvi::oracles {

using numerics::Matrix;

inline double combo_norm(const Matrix& g, const std::vector<double>& w) {
  std::vector<double> v(g.cols(), 0.0);
  for (std::size_t k = 0; k < g.rows(); ++k) {
    for (std::size_t c = 0; c < g.cols(); ++c) v[c] += w[k] * g(k, c);
  }
  return numerics::norm(v);
}

// Visits every simplex point with coordinates i/steps, i integer.
template <typename F>
void for_each_grid_point(std::size_t dim, std::size_t steps, F&& visit) {
  std::vector<std::size_t> counts(dim, 0);
  std::vector<double> w(dim);
  auto rec = [&](auto&& self, std::size_t j, std::size_t left) -> void {
    if (j + 1 == dim) {
      counts[j] = left;
      for (std::size_t k = 0; k < dim; ++k) w[k] = static_cast<double>(counts[k]) / static_cast<double>(steps);
      visit(w, counts);
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[j] = c;
      self(self, j + 1, left - c);
    }
  };
  rec(rec, 0, steps);
}

struct GridMinimum {
  std::vector<double> weights;
  double norm = std::numeric_limits<double>::infinity();
};

// Exhaustive search over the simplex grid with the given step count.
inline GridMinimum exhaustive_min_norm(const Matrix& g, std::size_t steps) {
  GridMinimum best;
  for_each_grid_point(g.rows(), steps, [&](const std::vector<double>& w, const auto&) {
    const double n = combo_norm(g, w);
    if (n < best.norm) {
      best.norm = n;
      best.weights = w;
    }
  });
  return best;
}

// Minimum over the fine grid (1/fine_steps) by a coarse exhaustive pass
// followed by pairwise mass transfers on the fine grid. The objective is a
// convex quadratic in the weights, so the transfer search settles at the
// fine-grid minimum's neighbourhood.
inline GridMinimum refined_min_norm(const Matrix& g, std::size_t coarse_steps, std::size_t fine_steps) {
  const std::size_t n = g.rows();
  const auto coarse = exhaustive_min_norm(g, coarse_steps);
  std::vector<long> units(n);
  const long ratio = static_cast<long>(fine_steps / coarse_steps);
  for (std::size_t k = 0; k < n; ++k) {
    units[k] = std::lround(coarse.weights[k] * static_cast<double>(coarse_steps)) * ratio;
  }
  auto weights = [&] {
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = static_cast<double>(units[k]) / static_cast<double>(fine_steps);
    return w;
  };
  double best = combo_norm(g, weights());
  for (long move = ratio; move >= 1; move = move / 2) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b || units[a] < move) continue;
          units[a] -= move;
          units[b] += move;
          const double cand = combo_norm(g, weights());
          if (cand < best - 1e-15) {
            best = cand;
            improved = true;
          } else {
            units[a] += move;
            units[b] -= move;
          }
        }
      }
    }
  }
  return {weights(), best};
}

}  // namespace phnhvi::oracles
