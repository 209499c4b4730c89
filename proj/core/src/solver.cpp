#include "phnhvi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phnhvi/error.hpp"
#include "phnhvi/hypervolume.hpp"

namespace phnhvi::solver {

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kPhnHvi:
      return "phn-hvi";
    case SolverKind::kPhnLs:
      return "phn-ls";
    case SolverKind::kCosmos:
      return "cosmos";
    case SolverKind::kStein:
      return "stein";
  }
  return "phn-hvi";
}

SolverKind solver_from_string(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "phn-hvi") return SolverKind::kPhnHvi;
  if (n == "phn-ls") return SolverKind::kPhnLs;
  if (n == "cosmos") return SolverKind::kCosmos;
  if (n == "stein") return SolverKind::kStein;
  throw InvalidArgument("unknown solver '" + name + "'");
}

std::vector<double> default_alpha(SolverKind kind, std::size_t objectives) {
  switch (kind) {
    case SolverKind::kPhnLs:
      return std::vector<double>(objectives, 0.2);
    case SolverKind::kCosmos:
      return std::vector<double>(objectives, 1.2);
    default:
      return std::vector<double>(objectives, 1.0 / static_cast<double>(objectives));
  }
}

void TrainConfig::validate(std::size_t objectives) const {
  const bool multi_sample = solver == SolverKind::kPhnHvi || solver == SolverKind::kStein;
  if (rays < 1) throw InvalidArgument("rays must be >= 1");
  if (multi_sample && rays < 2) {
    throw InvalidArgument("rays must be >= 2 for " + to_string(solver));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be > 0");
  if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
  if (alpha.size() != objectives) {
    throw InvalidArgument("alpha needs " + std::to_string(objectives) + " entries");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) throw InvalidArgument("alpha entries must be > 0");
  }
  if (ref_point.size() != objectives) {
    throw InvalidArgument("ref_point needs " + std::to_string(objectives) + " entries");
  }
  if (sigma && !(*sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
}

TrainState::TrainState(network::HypernetParams hn, double lr)
    : hypernet(std::move(hn)), adam(hypernet.params.size(), lr) {}

std::vector<double> effective_ref_point(const Matrix& losses, const TrainConfig& cfg) {
  bool inside = true;
  for (std::size_t i = 0; i < losses.rows() && inside; ++i) {
    inside = hypervolume::strictly_dominates(losses.row(i), cfg.ref_point);
  }
  if (inside) return cfg.ref_point;
  std::vector<double> ref(losses.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < losses.rows(); ++i) {
    for (std::size_t j = 0; j < losses.cols(); ++j) ref[j] = std::max(ref[j], losses(i, j));
  }
  for (double& v : ref) v *= cfg.gamma;
  return ref;
}

std::vector<PreferenceVector> sample_training_rays(std::size_t objectives, const TrainConfig& cfg,
                                                   numerics::Rng& rng) {
  if (objectives == 2 && cfg.partition) return preference::partition_sample_2d(cfg.rays, rng);
  return preference::dirichlet_rays(cfg.rays, cfg.alpha, rng);
}

double cosine_similarity(std::span<const double> r, std::span<const double> losses) {
  const double nr = numerics::norm(r);
  const double nl = numerics::norm(losses);
  if (nl <= 1e-12 || nr <= 1e-12) throw NumericError("cosine similarity of a zero vector");
  return numerics::dot(r, losses) / (nr * nl);
}

std::vector<double> cosine_alignment_grad(std::span<const double> r,
                                          std::span<const double> losses) {
  if (r.size() != losses.size()) throw DimensionError("cosine_alignment_grad: length mismatch");
  const double nl = numerics::norm(losses);
  const double nr = numerics::norm(r);
  if (nl <= 1e-12) throw NumericError("cosine_alignment_grad: loss vector has zero norm");
  if (nr <= 1e-12) throw NumericError("cosine_alignment_grad: ray has zero norm");
  const double rl = numerics::dot(r, losses);
  std::vector<double> g(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    g[j] = r[j] / (nr * nl) - rl * losses[j] / (nr * nl * nl * nl);
  }
  return g;
}

std::vector<double> cosine_alignment_grad(std::span<const double> r,
                                          std::span<const double> losses,
                                          const Matrix& jacobian) {
  return numerics::matvec_transposed(jacobian, cosine_alignment_grad(r, losses));
}

namespace {

struct RayPass {
  network::GeneratedTarget target;
  problems::LossEval loss;
};

std::vector<RayPass> forward_rays(const TrainState& state, const problems::Problem& problem,
                                  const std::vector<PreferenceVector>& rays, numerics::Rng& rng,
                                  const problems::Batch* batch) {
  if (rays.empty()) throw InvalidArgument("step requires at least one ray");
  std::vector<RayPass> passes;
  passes.reserve(rays.size());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (rays[i].size() != problem.objectives()) {
      throw DimensionError("ray " + std::to_string(i) + " has the wrong number of objectives");
    }
    RayPass pass;
    pass.target = network::generate_target(state.hypernet, rays[i], rng, /*train_mode=*/true);
    pass.loss = problem.eval(pass.target.weights.theta, batch);
    if (!numerics::all_finite(pass.loss.losses) || !numerics::all_finite(pass.loss.jacobian.data())) {
      throw NumericError("non-finite loss on ray " + std::to_string(i),
                         static_cast<std::ptrdiff_t>(i));
    }
    passes.push_back(std::move(pass));
  }
  return passes;
}

Matrix loss_matrix(const std::vector<RayPass>& passes) {
  const std::size_t j = passes.front().loss.losses.size();
  Matrix l(passes.size(), j);
  for (std::size_t i = 0; i < passes.size(); ++i) {
    std::copy(passes[i].loss.losses.begin(), passes[i].loss.losses.end(), l.row(i).begin());
  }
  return l;
}

// Accumulates sum_i dphi <loss_grad_i, L_i> in ray order.
void accumulate_loss_space(const TrainState& state, const std::vector<RayPass>& passes,
                           const Matrix& loss_grad, std::span<double> phi_grad) {
  for (std::size_t i = 0; i < passes.size(); ++i) {
    const auto dtheta = numerics::matvec_transposed(passes[i].loss.jacobian, loss_grad.row(i));
    network::backprop_to_phi_into(state.hypernet, passes[i].target.tape, dtheta, phi_grad);
  }
}

double mean_cosine(const std::vector<PreferenceVector>& rays, const Matrix& losses) {
  double total = 0.0;
  for (std::size_t i = 0; i < rays.size(); ++i) total += cosine_similarity(rays[i], losses.row(i));
  return total / static_cast<double>(rays.size());
}

// Loss-space gradient of -sum_i cos(r_i, L_i).
Matrix negative_cosine_grad(const std::vector<PreferenceVector>& rays, const Matrix& losses) {
  Matrix g(losses.rows(), losses.cols());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const auto c = cosine_alignment_grad(rays[i], losses.row(i));
    for (std::size_t j = 0; j < c.size(); ++j) g(i, j) = -c[j];
  }
  return g;
}

double frobenius(const Matrix& m) { return numerics::norm(m.data()); }

StepReport finish_step(TrainState& state, std::vector<double> phi_grad, Matrix losses,
                       const std::vector<PreferenceVector>& rays, std::vector<double> ref) {
  StepReport report;
  report.mean_cosine = mean_cosine(rays, losses);
  report.hv = hypervolume::hv(losses, ref);
  report.phi_grad_norm = numerics::norm(phi_grad);
  numerics::adam_step(state.adam, state.hypernet.params, phi_grad);
  report.iteration = state.adam.step_count;
  report.losses = std::move(losses);
  report.ref = std::move(ref);
  return report;
}

}  // namespace

StepReport phn_hvi_step(TrainState& state, const problems::Problem& problem,
                        const TrainConfig& cfg, const std::vector<PreferenceVector>& rays,
                        numerics::Rng& rng, const problems::Batch* batch) {
  const auto passes = forward_rays(state, problem, rays, rng, batch);
  Matrix losses = loss_matrix(passes);
  auto ref = effective_ref_point(losses, cfg);
  const Matrix hv_grad = hypervolume::hv_gradient(losses, ref);

  // Minimized objective: -HV - lambda * sum_i cos(r_i, L_i).
  Matrix loss_grad(losses.rows(), losses.cols());
  for (std::size_t k = 0; k < hv_grad.data().size(); ++k) loss_grad.data()[k] = -hv_grad.data()[k];
  double cos_norm = 0.0;
  if (cfg.lambda != 0.0) {
    const Matrix cos_grad = negative_cosine_grad(rays, losses);
    cos_norm = cfg.lambda * frobenius(cos_grad);
    numerics::axpy(cfg.lambda, cos_grad.data(), loss_grad.data());
  }
  std::vector<double> phi_grad(state.hypernet.params.size(), 0.0);
  accumulate_loss_space(state, passes, loss_grad, phi_grad);
  auto report = finish_step(state, std::move(phi_grad), std::move(losses), rays, std::move(ref));
  report.hv_grad_norm = frobenius(hv_grad);
  report.cosine_grad_norm = cos_norm;
  return report;
}

StepReport phn_hvi_step(TrainState& state, const problems::Problem& problem,
                        const TrainConfig& cfg, numerics::Rng& rng,
                        const problems::Batch* batch) {
  const auto rays = sample_training_rays(problem.objectives(), cfg, rng);
  return phn_hvi_step(state, problem, cfg, rays, rng, batch);
}

StepReport warmup_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, const std::vector<PreferenceVector>& rays,
                       numerics::Rng& rng, const problems::Batch* batch) {
  const auto passes = forward_rays(state, problem, rays, rng, batch);
  Matrix losses = loss_matrix(passes);
  const Matrix cos_grad = negative_cosine_grad(rays, losses);
  std::vector<double> phi_grad(state.hypernet.params.size(), 0.0);
  accumulate_loss_space(state, passes, cos_grad, phi_grad);
  auto ref = effective_ref_point(losses, cfg);
  auto report = finish_step(state, std::move(phi_grad), std::move(losses), rays, std::move(ref));
  report.cosine_grad_norm = frobenius(cos_grad);
  return report;
}

StepReport warmup_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, numerics::Rng& rng,
                       const problems::Batch* batch) {
  const auto rays = preference::dirichlet_rays(cfg.rays, cfg.alpha, rng);
  return warmup_step(state, problem, cfg, rays, rng, batch);
}

namespace {

StepReport scalarized_step(TrainState& state, const problems::Problem& problem,
                           const TrainConfig& cfg, const PreferenceVector& ray, double lambda,
                           numerics::Rng& rng, const problems::Batch* batch) {
  const std::vector<PreferenceVector> rays{ray};
  const auto passes = forward_rays(state, problem, rays, rng, batch);
  Matrix losses = loss_matrix(passes);
  Matrix loss_grad(1, losses.cols());
  std::copy(ray.begin(), ray.end(), loss_grad.row(0).begin());
  double cos_norm = 0.0;
  if (lambda != 0.0) {
    const Matrix cos_grad = negative_cosine_grad(rays, losses);
    cos_norm = lambda * frobenius(cos_grad);
    numerics::axpy(lambda, cos_grad.data(), loss_grad.data());
  }
  std::vector<double> phi_grad(state.hypernet.params.size(), 0.0);
  accumulate_loss_space(state, passes, loss_grad, phi_grad);
  auto ref = effective_ref_point(losses, cfg);
  auto report = finish_step(state, std::move(phi_grad), std::move(losses), rays, std::move(ref));
  report.cosine_grad_norm = cos_norm;
  return report;
}

}  // namespace

StepReport phn_ls_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, const PreferenceVector& ray, numerics::Rng& rng,
                       const problems::Batch* batch) {
  return scalarized_step(state, problem, cfg, ray, 0.0, rng, batch);
}

StepReport phn_ls_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, numerics::Rng& rng,
                       const problems::Batch* batch) {
  const auto ray = numerics::sample_dirichlet(cfg.alpha, rng);
  return phn_ls_step(state, problem, cfg, ray, rng, batch);
}

StepReport cosmos_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, const PreferenceVector& ray, numerics::Rng& rng,
                       const problems::Batch* batch) {
  return scalarized_step(state, problem, cfg, ray, cfg.lambda, rng, batch);
}

StepReport cosmos_step(TrainState& state, const problems::Problem& problem,
                       const TrainConfig& cfg, numerics::Rng& rng,
                       const problems::Batch* batch) {
  const auto ray = numerics::sample_dirichlet(cfg.alpha, rng);
  return cosmos_step(state, problem, cfg, ray, rng, batch);
}

double stein_kernel(std::span<const double> a, std::span<const double> b, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("stein_kernel: sigma must be > 0");
  const double s2 = sigma * sigma;
  const double norm = std::pow(2.0 * std::numbers::pi * s2, -0.5 * static_cast<double>(a.size()));
  return norm * std::exp(-numerics::squared_distance(a, b) / (2.0 * s2));
}

double median_bandwidth(const Matrix& losses) {
  std::vector<double> d2;
  for (std::size_t i = 0; i < losses.rows(); ++i) {
    for (std::size_t k = i + 1; k < losses.rows(); ++k) {
      d2.push_back(numerics::squared_distance(losses.row(i), losses.row(k)));
    }
  }
  if (d2.empty()) return 1.0;
  std::sort(d2.begin(), d2.end());
  const std::size_t n = d2.size();
  const double med = n % 2 == 1 ? d2[n / 2] : 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
  const double log_p = std::log(static_cast<double>(losses.rows()));
  if (!(med > 0.0) || !(log_p > 0.0)) return 1.0;
  return std::sqrt(med / (2.0 * log_p));
}

StepReport stein_step(TrainState& state, const problems::Problem& problem,
                      const TrainConfig& cfg, const std::vector<PreferenceVector>& rays,
                      numerics::Rng& rng, const problems::Batch* batch) {
  if (rays.size() < 2) throw InvalidArgument("stein_step requires at least two rays");
  const auto passes = forward_rays(state, problem, rays, rng, batch);
  Matrix losses = loss_matrix(passes);
  const std::size_t p = losses.rows();
  const std::size_t nobj = losses.cols();
  const std::size_t nphi = state.hypernet.params.size();
  const double sigma = cfg.sigma ? *cfg.sigma : median_bandwidth(losses);

  Matrix kernel(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < p; ++k) kernel(i, k) = stein_kernel(losses.row(i), losses.row(k), sigma);
  }

  std::vector<double> phi_grad(nphi, 0.0);
  // Attraction: sum_i sum_k k(L_i, L_k) g_k, with g_k the min-norm element of
  // the per-objective phi-gradients of ray k.
  for (std::size_t k = 0; k < p; ++k) {
    Matrix per_objective(nobj, nphi);
    for (std::size_t j = 0; j < nobj; ++j) {
      network::backprop_to_phi_into(state.hypernet, passes[k].target.tape,
                                    passes[k].loss.jacobian.row(j), per_objective.row(j));
    }
    const auto g = min_norm_convex_hull(per_objective);
    double weight = 0.0;
    for (std::size_t i = 0; i < p; ++i) weight += kernel(i, k);
    numerics::axpy(weight, g.vector, phi_grad);
  }

  // Repulsion: the kernel gradient w.r.t. the partner loss vector,
  // v_i = sum_k k(L_i, L_k) (L_i - L_k) / sigma^2, enters the descent
  // direction as -v_i so a descent step moves L_i away from its neighbours.
  Matrix loss_grad(p, nobj);
  const double s2 = sigma * sigma;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      if (k == i) continue;
      for (std::size_t j = 0; j < nobj; ++j) {
        loss_grad(i, j) -= kernel(i, k) * (losses(i, j) - losses(k, j)) / s2;
      }
    }
  }
  const double repulsion_norm = frobenius(loss_grad);
  double cos_norm = 0.0;
  if (cfg.lambda != 0.0) {
    const Matrix cos_grad = negative_cosine_grad(rays, losses);
    cos_norm = cfg.lambda * frobenius(cos_grad);
    numerics::axpy(cfg.lambda, cos_grad.data(), loss_grad.data());
  }
  accumulate_loss_space(state, passes, loss_grad, phi_grad);
  auto ref = effective_ref_point(losses, cfg);
  auto report = finish_step(state, std::move(phi_grad), std::move(losses), rays, std::move(ref));
  report.hv_grad_norm = repulsion_norm;
  report.cosine_grad_norm = cos_norm;
  return report;
}

StepReport stein_step(TrainState& state, const problems::Problem& problem,
                      const TrainConfig& cfg, numerics::Rng& rng,
                      const problems::Batch* batch) {
  const auto rays = sample_training_rays(problem.objectives(), cfg, rng);
  return stein_step(state, problem, cfg, rays, rng, batch);
}

}  // namespace phnhvi::solver
