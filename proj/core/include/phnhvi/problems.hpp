#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phnhvi/hypervolume.hpp"
#include "phnhvi/linalg.hpp"
#include "phnhvi/network.hpp"
#include "phnhvi/rng.hpp"

namespace phnhvi::problems {

using numerics::Matrix;

/// Row indices into a tabular dataset.
struct Batch {
  std::vector<std::size_t> rows;
};

/// Loss vector and its Jacobian (J x theta_dim, row j = dL_j/dtheta).
struct LossEval {
  std::vector<double> losses;
  Matrix jacobian;
};

class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t objectives() const = 0;
  /// What the hypernetwork must emit for this problem (dimension and squash).
  virtual network::TargetSpec target_spec() const = 0;
  virtual bool box_constrained() const { return false; }
  virtual bool batch_based() const { return false; }
  virtual bool has_oracle_front() const { return true; }
  /// Canonical evaluation reference point.
  virtual std::vector<double> reference_point() const;

  std::size_t theta_dim() const { return target_spec().parameter_count(); }

  /// Exact loss values and gradients. Batch-based problems require `batch`.
  /// Throws DimensionError on a theta length mismatch and InvalidArgument
  /// when a box-constrained problem receives theta outside its box.
  virtual LossEval eval(std::span<const double> theta, const Batch* batch = nullptr) const = 0;

  /// Batch used for final evaluation (the test split for tabular problems).
  virtual std::optional<Batch> evaluation_batch() const { return std::nullopt; }
  /// Batch used for model selection, if the problem has a validation split.
  virtual std::optional<Batch> validation_batch() const { return std::nullopt; }

 protected:
  void check_theta(std::span<const double> theta) const;
};

/// L1 = t^2, L2 = (t - 1)^2 with t in R.
class Problem1 final : public Problem {
 public:
  std::string name() const override { return "p1"; }
  std::size_t objectives() const override { return 2; }
  network::TargetSpec target_spec() const override;
  LossEval eval(std::span<const double> theta, const Batch* batch = nullptr) const override;
};

/// L_{1,2} = 1 - exp(-||theta -/+ 1/sqrt(d)||^2), theta in R^d. Concave front.
class Problem2 final : public Problem {
 public:
  explicit Problem2(std::size_t dim = 100);
  std::string name() const override { return "p2"; }
  std::size_t objectives() const override { return 2; }
  network::TargetSpec target_spec() const override;
  LossEval eval(std::span<const double> theta, const Batch* batch = nullptr) const override;
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
};

/// Two objectives over R^2 with a disconnected front.
class Problem3 final : public Problem {
 public:
  std::string name() const override { return "p3"; }
  std::size_t objectives() const override { return 2; }
  network::TargetSpec target_spec() const override;
  LossEval eval(std::span<const double> theta, const Batch* batch = nullptr) const override;
};

/// Three objectives over [0, 1]^10; front is the unit-sphere octant.
class Problem4 final : public Problem {
 public:
  std::string name() const override { return "p4"; }
  std::size_t objectives() const override { return 3; }
  network::TargetSpec target_spec() const override;
  bool box_constrained() const override { return true; }
  LossEval eval(std::span<const double> theta, const Batch* batch = nullptr) const override;
};

/// "p1".."p4". Throws InvalidArgument for other names.
std::unique_ptr<Problem> make_toy_problem(const std::string& name);

inline constexpr std::size_t kDefaultFrontResolution = 10000;
inline constexpr std::size_t kDefaultGridSide = 512;

/// Dense nondominated sample of the true front. `resolution` is the number
/// of parameter samples for 1-D parameterizations, the grid side for
/// Problem 3 (side^2 samples of theta_1 at theta_2 = 0, where the grid's
/// nondominated points lie), and the total sample count (side = sqrt) for
/// Problem 4.
/// Throws InvalidArgument for problems without an analytic front.
hypervolume::FrontSet oracle_front(const Problem& problem, std::size_t resolution,
                                   std::vector<double> ref = {});

/// Default resolution per toy problem.
std::size_t default_front_resolution(const Problem& problem);

// --- Tabular multi-output regression -------------------------------------

struct SplitRatios {
  double train = 0.65;
  double val = 0.15;
  double test = 0.20;
};

enum class TargetScaling { kNone, kDivideByMax };

struct TabularOptions {
  std::vector<std::string> target_columns;
  SplitRatios split;
  TargetScaling target_scaling = TargetScaling::kNone;
};

struct TabularDataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  Matrix raw_features;   // as read from disk
  Matrix raw_targets;
  Matrix features;       // standardized with train-split statistics
  Matrix targets;        // scaled per TargetScaling
  std::vector<double> feature_mean;
  std::vector<double> feature_std;   // zero for constant columns
  std::vector<double> target_scale;  // divisor applied to each target column
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Reads a headered numeric CSV. Split sizes are floor(train * n),
/// floor(val * n), remainder to test, over an rng-driven permutation.
/// Throws IoError (unreadable file, missing column, non-numeric cell) or
/// InvalidArgument (bad ratios, empty split).
TabularDataset load_tabular(const std::filesystem::path& path, const TabularOptions& options,
                            numerics::Rng& rng);

/// Writes raw features then raw targets with a header, full precision.
void write_tabular_csv(const std::filesystem::path& path, const TabularDataset& data);

/// Synthetic multi-output regression table: `features` Gaussian inputs and
/// `tasks` positive, partially conflicting targets named y1..yJ.
void write_synthetic_regression_csv(const std::filesystem::path& path, std::size_t rows,
                                    std::size_t features, std::size_t tasks, std::uint64_t seed);

/// Per-task mean squared error of a target MLP whose weights are theta.
class TabularProblem final : public Problem {
 public:
  TabularProblem(std::shared_ptr<const TabularDataset> data, std::vector<std::size_t> hidden,
                 numerics::Activation activation = numerics::Activation::kRelu);

  std::string name() const override { return "tabular"; }
  std::size_t objectives() const override { return data_->targets.cols(); }
  network::TargetSpec target_spec() const override { return target_; }
  bool batch_based() const override { return true; }
  bool has_oracle_front() const override { return false; }
  std::vector<double> reference_point() const override;
  LossEval eval(std::span<const double> theta, const Batch* batch = nullptr) const override;
  /// Losses only; cheaper than eval.
  std::vector<double> losses(std::span<const double> theta, const Batch& batch) const;

  std::optional<Batch> evaluation_batch() const override { return Batch{data_->test}; }
  std::optional<Batch> validation_batch() const override;

  const TabularDataset& data() const { return *data_; }

 private:
  std::shared_ptr<const TabularDataset> data_;
  network::TargetSpec target_;
};

}  // namespace phnhvi::problems
