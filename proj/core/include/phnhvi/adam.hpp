#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phnhvi/mlp.hpp"

namespace phnhvi::numerics {

struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<double> m;
  std::vector<double> v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t size, double learning_rate)
      : m(size, 0.0), v(size, 0.0), lr(learning_rate) {}
};

/// One bias-corrected Adam update, minimizing: params -= lr * m_hat / (sqrt(v_hat) + eps).
/// Throws NumericError carrying the first non-finite gradient index; in that
/// case neither params nor state are modified.
void adam_step(AdamState& state, FlatParams& params, std::span<const double> grads);

}  // namespace phnhvi::numerics
