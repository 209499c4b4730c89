#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phnhvi/adam.hpp"
#include "phnhvi/linalg.hpp"
#include "phnhvi/network.hpp"
#include "phnhvi/preference.hpp"
#include "phnhvi/problems.hpp"
#include "phnhvi/rng.hpp"

namespace phnhvi::solver {

using numerics::Matrix;
using preference::PreferenceVector;

enum class SolverKind { kPhnHvi, kPhnLs, kCosmos, kStein };

std::string to_string(SolverKind kind);
/// Accepts "phn-hvi", "phn-ls", "cosmos", "stein" (underscores allowed).
SolverKind solver_from_string(const std::string& name);

struct TrainConfig {
  SolverKind solver = SolverKind::kPhnHvi;
  std::size_t rays = 4;                  // p
  double lambda = 1.0;                   // weight of the cosine alignment term
  std::vector<double> alpha;             // Dirichlet concentration, one per objective
  std::vector<double> ref_point;         // canonical HV reference point
  double gamma = 1.1;                    // temporary reference rescale factor
  double lr = 1e-3;
  bool partition = true;                 // angular partition sampling when J == 2
  std::optional<double> sigma;           // Stein bandwidth; nullopt = median heuristic

  /// Throws InvalidArgument on inconsistent values for `objectives`.
  void validate(std::size_t objectives) const;
};

/// Default Dirichlet concentration: 1/J per objective for the multi-sample
/// solvers, 0.2 for PHN-LS and 1.2 for COSMOS.
std::vector<double> default_alpha(SolverKind kind, std::size_t objectives);

struct TrainState {
  network::HypernetParams hypernet;
  numerics::AdamState adam;

  TrainState(network::HypernetParams hn, double lr);
};

/// Telemetry of one optimization step.
struct StepReport {
  std::size_t iteration = 0;
  Matrix losses;                  // p x J
  double hv = 0.0;                // against `ref`
  double mean_cosine = 0.0;
  double hv_grad_norm = 0.0;      // norm of the loss-space HV ascent direction
  double cosine_grad_norm = 0.0;  // norm of the loss-space cosine term
  double phi_grad_norm = 0.0;     // norm of the final parameter gradient
  std::vector<double> ref;
};

/// Returns cfg.ref_point if every loss vector strictly dominates it;
/// otherwise gamma times the coordinatewise maximum of the losses.
std::vector<double> effective_ref_point(const Matrix& losses, const TrainConfig& cfg);

/// Training rays: partition sampling when J == 2 and cfg.partition is set,
/// otherwise cfg.rays Dirichlet draws.
std::vector<PreferenceVector> sample_training_rays(std::size_t objectives, const TrainConfig& cfg,
                                                   numerics::Rng& rng);

double cosine_similarity(std::span<const double> r, std::span<const double> losses);

/// d cos(r, L) / dL. Throws NumericError when ||L|| <= 1e-12.
std::vector<double> cosine_alignment_grad(std::span<const double> r,
                                          std::span<const double> losses);
/// Chained into theta: J^T d cos / dL.
std::vector<double> cosine_alignment_grad(std::span<const double> r,
                                          std::span<const double> losses,
                                          const Matrix& jacobian);

/// One PHN-HVI iteration on the given rays: ascend HV of the p loss vectors
/// plus lambda times the summed cosine alignment, then an Adam step on phi.
/// Throws NumericError with the ray index on a non-finite loss; the state
/// is left untouched in that case.
StepReport phn_hvi_step(TrainState& state, const problems::Problem& problem,
                        const TrainConfig& cfg, const std::vector<PreferenceVector>& rays,
                        numerics::Rng& rng, const problems::Batch* batch = nullptr);
/// Samples the rays first.
StepReport phn_hvi_step(TrainState& state, const problems::Problem& problem,
                        const TrainConfig& cfg, numerics::Rng& rng,
                        const problems::Batch* batch = nullptr);

/// Ascends the summed cosine alignment only, on cfg.rays Dirichlet rays.
StepReport warmup_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, numerics::Rng& rng,
                       const problems::Batch* batch = nullptr);
StepReport warmup_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, const std::vector<PreferenceVector>& rays,
                       numerics::Rng& rng, const problems::Batch* batch = nullptr);

/// Linear scalarization r . L on a single Dir(alpha) ray.
StepReport phn_ls_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, numerics::Rng& rng,
                       const problems::Batch* batch = nullptr);
StepReport phn_ls_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, const PreferenceVector& ray, numerics::Rng& rng,
                       const problems::Batch* batch = nullptr);

/// r . L - lambda cos(r, L) on a single Dir(alpha) ray.
StepReport cosmos_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, numerics::Rng& rng,
                       const problems::Batch* batch = nullptr);
StepReport cosmos_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, const PreferenceVector& ray, numerics::Rng& rng,
                       const problems::Batch* batch = nullptr);

struct MinNormResult {
  std::vector<double> weights;  // on the simplex
  std::vector<double> vector;   // sum_k weights_k * g_k
  std::size_t iterations = 0;
  double duality_gap = 0.0;
};

/// Minimum-norm element of the convex hull of the rows of `gradients`.
/// Two rows: closed form. More: away-step Frank-Wolfe on the Gram matrix
/// until the duality gap is <= 1e-10.
MinNormResult min_norm_convex_hull(const Matrix& gradients);

/// Stein kernel (2 pi sigma^2)^(-J/2) exp(-||a - b||^2 / (2 sigma^2)).
double stein_kernel(std::span<const double> a, std::span<const double> b, double sigma);
/// Median heuristic: 2 sigma^2 = median(pairwise squared distances) / log(p).
double median_bandwidth(const Matrix& losses);

/// Stein variational step: kernel-weighted min-norm descent directions,
/// kernel repulsion between loss vectors, and lambda-weighted cosine
/// alignment. Requires at least two rays.
StepReport stein_step(TrainState& state, const problems::Problem& problem,
                      const TrainConfig& cfg, const std::vector<PreferenceVector>& rays,
                      numerics::Rng& rng, const problems::Batch* batch = nullptr);
StepReport stein_step(TrainState& state, const problems::Problem& problem,
                      const TrainConfig& cfg, numerics::Rng& rng,
                      const problems::Batch* batch = nullptr);

}  // namespace phnhvi::solver
