#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phnhvi/error.hpp"
#include "phnhvi/problems.hpp"

namespace phnhvi::problems {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw IoError("line " + std::to_string(line_no) + ", column '" + column +
                  "': non-numeric cell '" + cell + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TabularDataset load_tabular(const std::filesystem::path& path, const TabularOptions& options,
                            numerics::Rng& rng) {
  const auto& ratios = options.split;
  if (ratios.train <= 0.0 || ratios.val < 0.0 || ratios.test <= 0.0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InvalidArgument("load_tabular: split ratios must be non-negative and sum to 1");
  }
  if (options.target_columns.empty()) {
    throw InvalidArgument("load_tabular: at least one target column is required");
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header row");
  const auto header = split_line(line);

  std::vector<std::size_t> target_idx;
  for (const auto& name : options.target_columns) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError(path.string() + ": missing column '" + name + "'");
    target_idx.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::size_t> feature_idx;
  TabularDataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::find(target_idx.begin(), target_idx.end(), c) == target_idx.end()) {
      feature_idx.push_back(c);
      data.feature_names.push_back(header[c]);
    }
  }
  data.target_names = options.target_columns;
  if (feature_idx.empty()) throw IoError(path.string() + ": no feature columns");

  std::vector<double> feats;
  std::vector<double> targs;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw IoError(path.string() + ": line " + std::to_string(line_no) + " has " +
                    std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header.size()));
    }
    for (std::size_t c : feature_idx) feats.push_back(parse_cell(cells[c], line_no, header[c]));
    for (std::size_t c : target_idx) targs.push_back(parse_cell(cells[c], line_no, header[c]));
    ++rows;
  }
  data.raw_features = Matrix(rows, feature_idx.size(), std::move(feats));
  data.raw_targets = Matrix(rows, target_idx.size(), std::move(targs));

  const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(rows)));
  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(rows)));
  if (n_train == 0 || n_train + n_val >= rows || (ratios.val > 0.0 && n_val == 0)) {
    throw InvalidArgument("load_tabular: " + std::to_string(rows) +
                          " rows leave an empty train/val/test split");
  }
  const auto perm = numerics::permutation(rows, rng);
  data.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                  perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  data.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());

  const std::size_t m = data.raw_features.cols();
  data.feature_mean.assign(m, 0.0);
  data.feature_std.assign(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    double mean = 0.0;
    for (std::size_t r : data.train) mean += data.raw_features(r, c);
    mean /= static_cast<double>(n_train);
    double var = 0.0;
    for (std::size_t r : data.train) {
      const double d = data.raw_features(r, c) - mean;
      var += d * d;
    }
    data.feature_mean[c] = mean;
    data.feature_std[c] = std::sqrt(var / static_cast<double>(n_train));
  }
  data.features = Matrix(rows, m);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double sd = data.feature_std[c];
      data.features(r, c) = sd > 0.0 ? (data.raw_features(r, c) - data.feature_mean[c]) / sd : 0.0;
    }
  }

  const std::size_t t = data.raw_targets.cols();
  data.target_scale.assign(t, 1.0);
  if (options.target_scaling == TargetScaling::kDivideByMax) {
    for (std::size_t c = 0; c < t; ++c) {
      double mx = 0.0;
      for (std::size_t r : data.train) mx = std::max(mx, std::abs(data.raw_targets(r, c)));
      data.target_scale[c] = mx > 0.0 ? mx : 1.0;
    }
  }
  data.targets = Matrix(rows, t);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < t; ++c) {
      data.targets(r, c) = data.raw_targets(r, c) / data.target_scale[c];
    }
  }
  return data;
}

void write_tabular_csv(const std::filesystem::path& path, const TabularDataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  std::string sep;
  for (const auto& n : data.feature_names) {
    out << sep << n;
    sep = ",";
  }
  for (const auto& n : data.target_names) out << "," << n;
  out << "\n";
  for (std::size_t r = 0; r < data.raw_features.rows(); ++r) {
    sep.clear();
    for (double v : data.raw_features.row(r)) {
      out << sep << format_double(v);
      sep = ",";
    }
    for (double v : data.raw_targets.row(r)) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) throw IoError("short write to " + path.string());
}

void write_synthetic_regression_csv(const std::filesystem::path& path, std::size_t rows,
                                    std::size_t features, std::size_t tasks, std::uint64_t seed) {
  if (rows == 0 || features == 0 || tasks == 0) {
    throw InvalidArgument("synthetic dataset needs positive rows, features and tasks");
  }
  numerics::Rng rng(seed);
  // Each task reads a shared latent direction plus its own; the shared part
  // enters with alternating sign so the tasks pull a common model apart.
  Matrix shared(1, features);
  Matrix own(tasks, features);
  for (double& w : shared.data()) w = rng.normal() / std::sqrt(static_cast<double>(features));
  for (double& w : own.data()) w = rng.normal() / std::sqrt(static_cast<double>(features));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t c = 0; c < features; ++c) out << (c ? "," : "") << "x" << (c + 1);
  for (std::size_t j = 0; j < tasks; ++j) out << ",y" << (j + 1);
  out << "\n";
  std::vector<double> x(features);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& v : x) v = rng.normal();
    const double s = numerics::dot(shared.row(0), x);
    for (std::size_t c = 0; c < features; ++c) out << (c ? "," : "") << format_double(x[c]);
    for (std::size_t j = 0; j < tasks; ++j) {
      const double o = numerics::dot(own.row(j), x);
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      const double y = 2.0 + sign * std::tanh(s) + 0.5 * std::sin(o) + 0.1 * o * o +
                       0.05 * rng.normal();
      out << "," << format_double(y);
    }
    out << "\n";
  }
  if (!out) throw IoError("short write to " + path.string());
}

TabularProblem::TabularProblem(std::shared_ptr<const TabularDataset> data,
                               std::vector<std::size_t> hidden, numerics::Activation activation)
    : data_(std::move(data)) {
  if (!data_) throw InvalidArgument("TabularProblem: null dataset");
  if (data_->targets.cols() < 2) {
    throw InvalidArgument("TabularProblem: need at least two target columns");
  }
  target_ = network::TargetSpec::mlp_target(numerics::MlpSpec::make(
      data_->features.cols(), std::move(hidden), data_->targets.cols(), activation));
}

std::vector<double> TabularProblem::reference_point() const {
  return std::vector<double>(objectives(), 1.0);
}

std::optional<Batch> TabularProblem::validation_batch() const {
  if (data_->val.empty()) return std::nullopt;
  return Batch{data_->val};
}

std::vector<double> TabularProblem::losses(std::span<const double> theta,
                                           const Batch& batch) const {
  check_theta(theta);
  if (batch.rows.empty()) throw InvalidArgument("tabular: empty batch");
  const auto params = network::unflatten(target_, theta);
  const std::size_t tasks = objectives();
  std::vector<double> loss(tasks, 0.0);
  for (std::size_t r : batch.rows) {
    const auto pred = numerics::mlp_predict(target_.mlp, params, data_->features.row(r));
    for (std::size_t j = 0; j < tasks; ++j) {
      const double e = pred[j] - data_->targets(r, j);
      loss[j] += e * e;
    }
  }
  for (double& l : loss) l /= static_cast<double>(batch.rows.size());
  return loss;
}

LossEval TabularProblem::eval(std::span<const double> theta, const Batch* batch) const {
  check_theta(theta);
  if (batch == nullptr) throw InvalidArgument("tabular: eval requires a batch");
  if (batch->rows.empty()) throw InvalidArgument("tabular: empty batch");
  const auto params = network::unflatten(target_, theta);
  const std::size_t tasks = objectives();
  const double inv_n = 1.0 / static_cast<double>(batch->rows.size());
  LossEval out;
  out.losses.assign(tasks, 0.0);
  out.jacobian = Matrix(tasks, theta.size());
  numerics::Rng unused(0);
  std::vector<double> grad_out(tasks, 0.0);
  for (std::size_t r : batch->rows) {
    const auto fwd = numerics::mlp_forward(target_.mlp, params, data_->features.row(r), unused,
                                           /*train_mode=*/false);
    for (std::size_t j = 0; j < tasks; ++j) {
      const double e = fwd.output[j] - data_->targets(r, j);
      out.losses[j] += e * e * inv_n;
      std::fill(grad_out.begin(), grad_out.end(), 0.0);
      grad_out[j] = 2.0 * e * inv_n;
      numerics::mlp_backward_into(params, fwd.tape, grad_out, out.jacobian.row(j));
    }
  }
  return out;
}

}  // namespace phnhvi::problems
