#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phnhvi/rng.hpp"

namespace phnhvi::numerics {

enum class Activation { kRelu, kTanh, kSigmoid, kLinear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Fully connected network description. `activations` holds one entry per
/// layer (hidden layers first, output layer last). Dropout, when the rate is
/// non-zero, is applied to the output of the last hidden layer only.
struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 0;
  std::vector<Activation> activations;
  double dropout_rate = 0.0;

  /// Same activation on every hidden layer, linear output.
  static MlpSpec make(std::size_t input_dim, std::vector<std::size_t> hidden_dims,
                      std::size_t output_dim, Activation hidden_activation,
                      double dropout_rate = 0.0);

  std::size_t num_layers() const noexcept { return hidden_dims.size() + 1; }
  std::size_t layer_input(std::size_t layer) const;
  std::size_t layer_output(std::size_t layer) const;
  std::size_t parameter_count() const;
  /// Throws InvalidArgument on non-positive widths, a wrong activation
  /// count, or a dropout rate outside [0, 1).
  void validate() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct LayoutEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;

  std::size_t size() const;
  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

/// Flat parameter vector with a named layout table. Every copy gets a fresh
/// identity and every mutable access bumps the revision, which lets tapes
/// detect that the parameters they were recorded against have changed.
class FlatParams {
 public:
  FlatParams();
  FlatParams(std::vector<LayoutEntry> layout, std::vector<double> values);
  FlatParams(const FlatParams& other);
  FlatParams& operator=(const FlatParams& other);
  FlatParams(FlatParams&&) noexcept = default;
  FlatParams& operator=(FlatParams&&) noexcept = default;

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values();
  const std::vector<LayoutEntry>& layout() const noexcept { return layout_; }

  const LayoutEntry& entry(const std::string& name) const;
  std::span<const double> slice(const std::string& name) const;

  std::uint64_t id() const noexcept { return id_; }
  std::uint64_t revision() const noexcept { return revision_; }

 private:
  std::vector<LayoutEntry> layout_;
  std::vector<double> values_;
  std::uint64_t id_;
  std::uint64_t revision_ = 0;
};

/// Zero-filled parameters laid out as layer{i}.weight [out, in], layer{i}.bias [out].
FlatParams make_mlp_params(const MlpSpec& spec);
std::vector<LayoutEntry> mlp_layout(const MlpSpec& spec);
/// PyTorch-style Linear default: weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_kaiming_uniform(const MlpSpec& spec, FlatParams& params, Rng& rng);

/// Everything a backward pass needs from one forward pass.
struct MlpTape {
  std::uint64_t params_id = 0;
  std::uint64_t params_revision = 0;
  MlpSpec spec;
  std::vector<std::vector<double>> layer_inputs;  // a_l fed into layer l
  std::vector<std::vector<double>> activations;   // act(z_l), before dropout
  std::vector<double> dropout_scale;              // per unit of the last hidden layer
  bool dropout_applied = false;
};

struct MlpForward {
  std::vector<double> output;
  MlpTape tape;
};

struct MlpGradients {
  std::vector<double> params;
  std::vector<double> input;
};

/// Throws DimensionError naming the layer on shape mismatch.
MlpForward mlp_forward(const MlpSpec& spec, const FlatParams& params,
                       std::span<const double> input, Rng& rng, bool train_mode);

/// Output only, without recording a tape.
std::vector<double> mlp_predict(const MlpSpec& spec, const FlatParams& params,
                                std::span<const double> input);

/// Gradients of <output_grad, output> w.r.t. params and input.
/// Throws StaleTapeError if `params` is not the object (and revision) the
/// tape was recorded against.
MlpGradients mlp_backward(const FlatParams& params, const MlpTape& tape,
                          std::span<const double> output_grad);

/// Accumulating variant: adds into `param_grads`; `input_grad` is optional.
void mlp_backward_into(const FlatParams& params, const MlpTape& tape,
                       std::span<const double> output_grad, std::span<double> param_grads,
                       std::span<double> input_grad = {});

}  // namespace phnhvi::numerics
