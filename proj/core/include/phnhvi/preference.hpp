#pragma once

#include <cstddef>
#include <vector>

#include "phnhvi/linalg.hpp"
#include "phnhvi/rng.hpp"

namespace phnhvi::preference {

/// A point of the probability simplex: non-negative weights summing to one.
using PreferenceVector = std::vector<double>;

/// True when every weight is >= 0 and the sum is within `tol` of one.
bool on_simplex(const PreferenceVector& r, double tol = 1e-9);

/// Angular cell i of the positive quadrant: [i*pi/(2p), (i+1)*pi/(2p)].
struct PartitionCell2D {
  std::size_t index = 0;
  std::size_t cells = 1;

  double lower() const;
  double upper() const;
  bool contains(double angle) const;
};

/// Maps a quadrant angle to the simplex: (cos a, sin a) / (cos a + sin a).
PreferenceVector angle_to_simplex(double angle);
/// Inverse of angle_to_simplex for 2-D simplex points.
double simplex_to_angle(const PreferenceVector& r);

/// One ray per angular cell, angle uniform on the open cell, in cell order.
/// Throws InvalidArgument when p == 0.
std::vector<PreferenceVector> partition_sample_2d(std::size_t p, numerics::Rng& rng);

/// `count` independent Dir(alpha) draws.
std::vector<PreferenceVector> dirichlet_rays(std::size_t count, const std::vector<double>& alpha,
                                             numerics::Rng& rng);

struct LatticeConfig {
  std::size_t objectives = 2;  // J
  std::size_t divisions = 1;   // k, grid step 1/k
};

/// C(n, k) in floating point-free integer arithmetic.
std::size_t binomial(std::size_t n, std::size_t k);
std::size_t lattice_size(const LatticeConfig& cfg);

/// Every simplex point with coordinates in {0, 1/k, ..., 1}, ascending
/// lexicographic order in (u_1, ..., u_{J-1}). Size C(J+k-1, k).
std::vector<PreferenceVector> das_dennis_lattice(const LatticeConfig& cfg);

/// Evaluation rays. J == 2: `count_hint` rays with equal angular gaps over
/// [0, pi/2], endpoints included. J >= 3: the smallest lattice with at least
/// `count_hint` points, zero coordinates raised to 1e-3 and renormalized.
std::vector<PreferenceVector> test_rays(std::size_t objectives, std::size_t count_hint);

inline constexpr double kBoundaryNudge = 1e-3;

/// Rays as a (count x J) matrix.
numerics::Matrix to_matrix(const std::vector<PreferenceVector>& rays);

}  // namespace phnhvi::preference
