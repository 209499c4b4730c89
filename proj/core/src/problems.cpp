#include "phnhvi/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phnhvi/error.hpp"

namespace phnhvi::problems {

using std::numbers::pi;

std::vector<double> Problem::reference_point() const {
  return std::vector<double>(objectives(), 2.0);
}

void Problem::check_theta(std::span<const double> theta) const {
  if (theta.size() != theta_dim()) {
    throw DimensionError(name() + ": theta has " + std::to_string(theta.size()) +
                         " entries, expected " + std::to_string(theta_dim()));
  }
}

network::TargetSpec Problem1::target_spec() const { return network::TargetSpec::raw_vector(1); }

LossEval Problem1::eval(std::span<const double> theta, const Batch*) const {
  check_theta(theta);
  const double t = theta[0];
  LossEval out;
  out.losses = {t * t, (t - 1.0) * (t - 1.0)};
  out.jacobian = Matrix(2, 1, {2.0 * t, 2.0 * (t - 1.0)});
  return out;
}

Problem2::Problem2(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw InvalidArgument("p2: dimension must be positive");
}

network::TargetSpec Problem2::target_spec() const { return network::TargetSpec::raw_vector(dim_); }

LossEval Problem2::eval(std::span<const double> theta, const Batch*) const {
  check_theta(theta);
  const double shift = 1.0 / std::sqrt(static_cast<double>(dim_));
  double dist_minus = 0.0;
  double dist_plus = 0.0;
  for (double t : theta) {
    dist_minus += (t - shift) * (t - shift);
    dist_plus += (t + shift) * (t + shift);
  }
  const double e1 = std::exp(-dist_minus);
  const double e2 = std::exp(-dist_plus);
  LossEval out;
  out.losses = {1.0 - e1, 1.0 - e2};
  out.jacobian = Matrix(2, dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    out.jacobian(0, k) = 2.0 * e1 * (theta[k] - shift);
    out.jacobian(1, k) = 2.0 * e2 * (theta[k] + shift);
  }
  return out;
}

network::TargetSpec Problem3::target_spec() const { return network::TargetSpec::raw_vector(2); }

LossEval Problem3::eval(std::span<const double> theta, const Batch*) const {
  check_theta(theta);
  const double c1 = std::cos(theta[0]);
  const double s1 = std::sin(theta[0]);
  const double s2 = std::sin(theta[1]);
  const double c2 = std::cos(theta[1]);
  const double u = 22.0 * pi * c1 * c1;
  const double su = std::sin(u);
  const double su4 = su * su * su * su;
  LossEval out;
  out.losses = {c1 * c1 + 0.2, 1.3 + s2 * s2 - c1 - 0.1 * su4 * su};
  const double du_dt1 = -22.0 * pi * 2.0 * c1 * s1;
  out.jacobian = Matrix(2, 2);
  out.jacobian(0, 0) = -2.0 * c1 * s1;
  out.jacobian(0, 1) = 0.0;
  out.jacobian(1, 0) = s1 - 0.5 * su4 * std::cos(u) * du_dt1;
  out.jacobian(1, 1) = 2.0 * s2 * c2;
  return out;
}

network::TargetSpec Problem4::target_spec() const {
  return network::TargetSpec::raw_vector(10, network::Squash::kSigmoid);
}

LossEval Problem4::eval(std::span<const double> theta, const Batch*) const {
  check_theta(theta);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!(theta[k] >= 0.0 && theta[k] <= 1.0)) {
      throw InvalidArgument("p4: theta[" + std::to_string(k) + "] = " + std::to_string(theta[k]) +
                            " lies outside [0, 1]");
    }
  }
  const double half_pi = pi / 2.0;
  double g = 1.0;
  for (std::size_t k = 2; k < 10; ++k) g += (theta[k] - 0.5) * (theta[k] - 0.5);
  const double ca = std::cos(half_pi * theta[0]);
  const double sa = std::sin(half_pi * theta[0]);
  const double cb = std::cos(half_pi * theta[1]);
  const double sb = std::sin(half_pi * theta[1]);
  LossEval out;
  out.losses = {ca * cb * g, ca * sb * g, sa * g};
  out.jacobian = Matrix(3, 10);
  out.jacobian(0, 0) = -half_pi * sa * cb * g;
  out.jacobian(0, 1) = -half_pi * ca * sb * g;
  out.jacobian(1, 0) = -half_pi * sa * sb * g;
  out.jacobian(1, 1) = half_pi * ca * cb * g;
  out.jacobian(2, 0) = half_pi * ca * g;
  out.jacobian(2, 1) = 0.0;
  for (std::size_t k = 2; k < 10; ++k) {
    const double dg = 2.0 * (theta[k] - 0.5);
    out.jacobian(0, k) = ca * cb * dg;
    out.jacobian(1, k) = ca * sb * dg;
    out.jacobian(2, k) = sa * dg;
  }
  return out;
}

std::unique_ptr<Problem> make_toy_problem(const std::string& name) {
  if (name == "p1") return std::make_unique<Problem1>();
  if (name == "p2") return std::make_unique<Problem2>();
  if (name == "p3") return std::make_unique<Problem3>();
  if (name == "p4") return std::make_unique<Problem4>();
  throw InvalidArgument("unknown toy problem '" + name + "' (expected p1..p4)");
}

std::size_t default_front_resolution(const Problem& problem) {
  return problem.name() == "p3" ? kDefaultGridSide : kDefaultFrontResolution;
}

namespace {

hypervolume::FrontSet keep_nondominated(std::vector<double> data, std::size_t dim,
                                        std::vector<double> ref) {
  const std::size_t rows = data.size() / dim;
  Matrix all(rows, dim, std::move(data));
  const auto mask = hypervolume::filter_nondominated(all);
  std::vector<double> kept;
  std::size_t n = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!mask[i]) continue;
    const auto r = all.row(i);
    kept.insert(kept.end(), r.begin(), r.end());
    ++n;
  }
  return hypervolume::FrontSet::make(Matrix(n, dim, std::move(kept)), std::move(ref));
}

}  // namespace

hypervolume::FrontSet oracle_front(const Problem& problem, std::size_t resolution,
                                   std::vector<double> ref) {
  if (!problem.has_oracle_front()) {
    throw InvalidArgument("oracle_front: problem '" + problem.name() + "' has no analytic front");
  }
  if (resolution < 2) throw InvalidArgument("oracle_front: resolution must be >= 2");
  if (ref.empty()) ref = problem.reference_point();
  const std::string name = problem.name();
  const std::size_t dim = problem.objectives();
  std::vector<double> data;

  if (name == "p1" || name == "p2") {
    const std::size_t d = problem.theta_dim();
    const double lo = name == "p1" ? 0.0 : -1.0;
    const double scale = name == "p1" ? 1.0 : 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<double> theta(d);
    data.reserve(resolution * dim);
    for (std::size_t k = 0; k < resolution; ++k) {
      const double t = lo + (1.0 - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
      std::fill(theta.begin(), theta.end(), t * scale);
      const auto l = problem.eval(theta).losses;
      data.insert(data.end(), l.begin(), l.end());
    }
  } else if (name == "p3") {
    // Objectives are pi-periodic in both coordinates; one period suffices.
    // theta_2 only adds sin^2(theta_2) >= 0 to L2, so every nondominated
    // point of the [0, pi]^2 grid lies on its theta_2 = 0 column. Sampling
    // that column with side^2 points gives the grid's sample budget along
    // the only axis that matters.
    const std::size_t samples = resolution * resolution;
    data.reserve(samples * dim);
    std::vector<double> theta(2, 0.0);
    for (std::size_t a = 0; a < samples; ++a) {
      theta[0] = pi * static_cast<double>(a) / static_cast<double>(samples - 1);
      const auto l = problem.eval(theta).losses;
      data.insert(data.end(), l.begin(), l.end());
    }
  } else if (name == "p4") {
    const auto side = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(resolution)))));
    std::vector<double> theta(10, 0.5);
    data.reserve(side * side * dim);
    for (std::size_t a = 0; a < side; ++a) {
      theta[0] = static_cast<double>(a) / static_cast<double>(side - 1);
      for (std::size_t b = 0; b < side; ++b) {
        theta[1] = static_cast<double>(b) / static_cast<double>(side - 1);
        const auto l = problem.eval(theta).losses;
        data.insert(data.end(), l.begin(), l.end());
      }
    }
  } else {
    throw InvalidArgument("oracle_front: no front parameterization for '" + name + "'");
  }
  return keep_nondominated(std::move(data), dim, std::move(ref));
}

}  // namespace phnhvi::problems
