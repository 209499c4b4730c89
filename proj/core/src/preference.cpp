#include "phnhvi/preference.hpp"

#include <cmath>
#include <numbers>

#include "phnhvi/error.hpp"

namespace phnhvi::preference {

namespace {
constexpr double kQuadrant = std::numbers::pi / 2.0;
}

bool on_simplex(const PreferenceVector& r, double tol) {
  if (r.empty()) return false;
  double total = 0.0;
  for (double w : r) {
    if (!(w >= 0.0)) return false;
    total += w;
  }
  return std::abs(total - 1.0) <= tol;
}

double PartitionCell2D::lower() const {
  return kQuadrant * static_cast<double>(index) / static_cast<double>(cells);
}

double PartitionCell2D::upper() const {
  return kQuadrant * static_cast<double>(index + 1) / static_cast<double>(cells);
}

bool PartitionCell2D::contains(double angle) const {
  return angle >= lower() && angle <= upper();
}

PreferenceVector angle_to_simplex(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double total = c + s;
  return {c / total, s / total};
}

double simplex_to_angle(const PreferenceVector& r) {
  if (r.size() != 2) throw DimensionError("simplex_to_angle: expected a 2-D ray");
  return std::atan2(r[1], r[0]);
}

std::vector<PreferenceVector> partition_sample_2d(std::size_t p, numerics::Rng& rng) {
  if (p == 0) throw InvalidArgument("partition_sample_2d: need at least one ray");
  std::vector<PreferenceVector> rays;
  rays.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double angle =
        kQuadrant * (static_cast<double>(i) + rng.uniform_open()) / static_cast<double>(p);
    rays.push_back(angle_to_simplex(angle));
  }
  return rays;
}

std::vector<PreferenceVector> dirichlet_rays(std::size_t count, const std::vector<double>& alpha,
                                             numerics::Rng& rng) {
  std::vector<PreferenceVector> rays;
  rays.reserve(count);
  for (std::size_t i = 0; i < count; ++i) rays.push_back(numerics::sample_dirichlet(alpha, rng));
  return rays;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // Exact at every step: result * (n - k + i) is divisible by i.
    result = result * (n - k + i) / i;
  }
  return result;
}

std::size_t lattice_size(const LatticeConfig& cfg) {
  return binomial(cfg.objectives + cfg.divisions - 1, cfg.divisions);
}

namespace {

void enumerate(std::size_t position, std::size_t remaining, const LatticeConfig& cfg,
               std::vector<std::size_t>& counts, std::vector<PreferenceVector>& out) {
  const std::size_t last = cfg.objectives - 1;
  if (position == last) {
    counts[last] = remaining;
    PreferenceVector u(cfg.objectives);
    const double k = static_cast<double>(cfg.divisions);
    for (std::size_t j = 0; j < cfg.objectives; ++j) u[j] = static_cast<double>(counts[j]) / k;
    out.push_back(std::move(u));
    return;
  }
  for (std::size_t c = 0; c <= remaining; ++c) {
    counts[position] = c;
    enumerate(position + 1, remaining - c, cfg, counts, out);
  }
}

}  // namespace

std::vector<PreferenceVector> das_dennis_lattice(const LatticeConfig& cfg) {
  if (cfg.objectives < 2) throw InvalidArgument("das_dennis_lattice: need J >= 2");
  if (cfg.divisions < 1) throw InvalidArgument("das_dennis_lattice: need k >= 1");
  std::vector<PreferenceVector> out;
  out.reserve(lattice_size(cfg));
  std::vector<std::size_t> counts(cfg.objectives, 0);
  enumerate(0, cfg.divisions, cfg, counts, out);
  return out;
}

std::vector<PreferenceVector> test_rays(std::size_t objectives, std::size_t count_hint) {
  if (objectives < 2) throw InvalidArgument("test_rays: need J >= 2");
  const std::size_t count = std::max<std::size_t>(count_hint, 1);
  std::vector<PreferenceVector> rays;
  if (objectives == 2) {
    rays.reserve(count);
    if (count == 1) {
      rays.push_back(angle_to_simplex(kQuadrant / 2.0));
      return rays;
    }
    for (std::size_t i = 0; i < count; ++i) {
      rays.push_back(
          angle_to_simplex(kQuadrant * static_cast<double>(i) / static_cast<double>(count - 1)));
    }
    return rays;
  }
  LatticeConfig cfg{objectives, 1};
  while (lattice_size(cfg) < count) ++cfg.divisions;
  rays = das_dennis_lattice(cfg);
  for (auto& r : rays) {
    double total = 0.0;
    for (double& w : r) {
      if (w == 0.0) w = kBoundaryNudge;
      total += w;
    }
    for (double& w : r) w /= total;
  }
  return rays;
}

numerics::Matrix to_matrix(const std::vector<PreferenceVector>& rays) {
  if (rays.empty()) return {};
  numerics::Matrix m(rays.size(), rays.front().size());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (rays[i].size() != m.cols()) throw DimensionError("to_matrix: ragged ray list");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rays[i][j];
  }
  return m;
}

}  // namespace phnhvi::preference
