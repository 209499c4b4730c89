#include "phnhvi/linalg.hpp"

#include <cmath>

#include "phnhvi/error.hpp"

namespace phnhvi::numerics {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix buffer has " + std::to_string(data_.size()) +
                         " entries, expected " + std::to_string(rows * cols));
  }
}

namespace {
void require_same(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}
}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "squared_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  require_same(a.cols(), x.size(), "matvec");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
  return y;
}

std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x) {
  require_same(a.rows(), x.size(), "matvec_transposed");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) axpy(x[r], a.row(r), y);
  return y;
}

Matrix gram(const Matrix& rows) {
  Matrix g(rows.rows(), rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t j = i; j < rows.rows(); ++j) {
      const double v = dot(rows.row(i), rows.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace phnhvi::numerics
