#include "phnhvi/mlp.hpp"

#include <atomic>
#include <cmath>

#include "phnhvi/error.hpp"

namespace phnhvi::numerics {
namespace {

std::uint64_t next_params_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::kLinear:
      return z;
  }
  return z;
}

// Derivative expressed through the activation value y = act(z).
double activate_derivative(Activation a, double y) {
  switch (a) {
    case Activation::kRelu:
      return y > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh:
      return 1.0 - y * y;
    case Activation::kSigmoid:
      return y * (1.0 - y);
    case Activation::kLinear:
      return 1.0;
  }
  return 1.0;
}

std::string layer_name(std::size_t l) { return "layer" + std::to_string(l); }

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kLinear:
      return "linear";
  }
  return "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "linear") return Activation::kLinear;
  throw InvalidArgument("unknown activation '" + name + "'");
}

MlpSpec MlpSpec::make(std::size_t input_dim, std::vector<std::size_t> hidden_dims,
                      std::size_t output_dim, Activation hidden_activation,
                      double dropout_rate) {
  MlpSpec spec;
  spec.input_dim = input_dim;
  spec.output_dim = output_dim;
  spec.activations.assign(hidden_dims.size(), hidden_activation);
  spec.activations.push_back(Activation::kLinear);
  spec.hidden_dims = std::move(hidden_dims);
  spec.dropout_rate = dropout_rate;
  spec.validate();
  return spec;
}

std::size_t MlpSpec::layer_input(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_dims[layer - 1];
}

std::size_t MlpSpec::layer_output(std::size_t layer) const {
  return layer < hidden_dims.size() ? hidden_dims[layer] : output_dim;
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    total += layer_output(l) * layer_input(l) + layer_output(l);
  }
  return total;
}

void MlpSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) {
    throw InvalidArgument("MlpSpec: input and output dims must be positive");
  }
  for (std::size_t l = 0; l < hidden_dims.size(); ++l) {
    if (hidden_dims[l] == 0) {
      throw InvalidArgument("MlpSpec: hidden layer " + std::to_string(l) + " has width 0");
    }
  }
  if (activations.size() != num_layers()) {
    throw InvalidArgument("MlpSpec: expected " + std::to_string(num_layers()) +
                          " activations, got " + std::to_string(activations.size()));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw InvalidArgument("MlpSpec: dropout rate must lie in [0, 1)");
  }
  if (dropout_rate > 0.0 && hidden_dims.empty()) {
    throw InvalidArgument("MlpSpec: dropout requires at least one hidden layer");
  }
}

std::size_t LayoutEntry::size() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

FlatParams::FlatParams() : id_(next_params_id()) {}

FlatParams::FlatParams(std::vector<LayoutEntry> layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)), id_(next_params_id()) {
  std::size_t expected_offset = 0;
  for (const auto& e : layout_) {
    if (e.offset != expected_offset) {
      throw DimensionError("FlatParams: entry '" + e.name + "' at offset " +
                           std::to_string(e.offset) + ", expected " +
                           std::to_string(expected_offset));
    }
    expected_offset += e.size();
  }
  if (expected_offset != values_.size()) {
    throw DimensionError("FlatParams: layout covers " + std::to_string(expected_offset) +
                         " values but vector has " + std::to_string(values_.size()));
  }
}

FlatParams::FlatParams(const FlatParams& other)
    : layout_(other.layout_), values_(other.values_), id_(next_params_id()) {}

FlatParams& FlatParams::operator=(const FlatParams& other) {
  if (this != &other) {
    layout_ = other.layout_;
    values_ = other.values_;
    id_ = next_params_id();
    revision_ = 0;
  }
  return *this;
}

std::span<double> FlatParams::mutable_values() {
  ++revision_;
  return values_;
}

const LayoutEntry& FlatParams::entry(const std::string& name) const {
  for (const auto& e : layout_) {
    if (e.name == name) return e;
  }
  throw InvalidArgument("FlatParams: no entry named '" + name + "'");
}

std::span<const double> FlatParams::slice(const std::string& name) const {
  const auto& e = entry(name);
  return std::span<const double>(values_).subspan(e.offset, e.size());
}

std::vector<LayoutEntry> mlp_layout(const MlpSpec& spec) {
  spec.validate();
  std::vector<LayoutEntry> layout;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_input(l);
    const std::size_t out = spec.layer_output(l);
    layout.push_back({layer_name(l) + ".weight", {out, in}, offset});
    offset += out * in;
    layout.push_back({layer_name(l) + ".bias", {out}, offset});
    offset += out;
  }
  return layout;
}

FlatParams make_mlp_params(const MlpSpec& spec) {
  return FlatParams(mlp_layout(spec), std::vector<double>(spec.parameter_count(), 0.0));
}

void init_kaiming_uniform(const MlpSpec& spec, FlatParams& params, Rng& rng) {
  if (params.size() != spec.parameter_count()) {
    throw DimensionError("init_kaiming_uniform: parameter count mismatch");
  }
  auto values = params.mutable_values();
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_input(l);
    const std::size_t out = spec.layer_output(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t k = 0; k < out * in + out; ++k) {
      values[offset + k] = rng.uniform(-bound, bound);
    }
    offset += out * in + out;
  }
}

namespace {

void check_params(const MlpSpec& spec, const FlatParams& params) {
  if (params.size() != spec.parameter_count()) {
    throw DimensionError("mlp: parameter vector has " + std::to_string(params.size()) +
                         " entries, spec requires " + std::to_string(spec.parameter_count()));
  }
}

// z = W a + b followed by the activation, written into `out`.
void dense_forward(std::span<const double> w, std::span<const double> b,
                   std::span<const double> a, Activation act, std::span<double> out) {
  const std::size_t in = a.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    const double* row = w.data() + o * in;
    double z = b[o];
    for (std::size_t i = 0; i < in; ++i) z += row[i] * a[i];
    out[o] = activate(act, z);
  }
}

}  // namespace

MlpForward mlp_forward(const MlpSpec& spec, const FlatParams& params,
                       std::span<const double> input, Rng& rng, bool train_mode) {
  spec.validate();
  check_params(spec, params);
  if (input.size() != spec.input_dim) {
    throw DimensionError("mlp layer 0: input has length " + std::to_string(input.size()) +
                         ", expected " + std::to_string(spec.input_dim));
  }
  MlpForward result;
  MlpTape& tape = result.tape;
  tape.params_id = params.id();
  tape.params_revision = params.revision();
  tape.spec = spec;
  tape.layer_inputs.reserve(spec.num_layers());
  tape.activations.reserve(spec.num_layers());

  const auto values = params.values();
  std::vector<double> current(input.begin(), input.end());
  std::size_t offset = 0;
  const std::size_t last_hidden = spec.hidden_dims.size();  // index + 1
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_input(l);
    const std::size_t out = spec.layer_output(l);
    const auto w = values.subspan(offset, out * in);
    const auto b = values.subspan(offset + out * in, out);
    offset += out * in + out;

    std::vector<double> next(out);
    dense_forward(w, b, current, spec.activations[l], next);
    tape.layer_inputs.push_back(std::move(current));
    tape.activations.push_back(next);

    if (train_mode && spec.dropout_rate > 0.0 && l + 1 == last_hidden) {
      const double keep = 1.0 - spec.dropout_rate;
      tape.dropout_scale.resize(out);
      for (std::size_t o = 0; o < out; ++o) {
        tape.dropout_scale[o] = rng.uniform() < keep ? 1.0 / keep : 0.0;
        next[o] *= tape.dropout_scale[o];
      }
      tape.dropout_applied = true;
    }
    current = std::move(next);
  }
  result.output = std::move(current);
  return result;
}

std::vector<double> mlp_predict(const MlpSpec& spec, const FlatParams& params,
                                std::span<const double> input) {
  check_params(spec, params);
  if (input.size() != spec.input_dim) {
    throw DimensionError("mlp layer 0: input has length " + std::to_string(input.size()) +
                         ", expected " + std::to_string(spec.input_dim));
  }
  const auto values = params.values();
  std::vector<double> current(input.begin(), input.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_input(l);
    const std::size_t out = spec.layer_output(l);
    std::vector<double> next(out);
    dense_forward(values.subspan(offset, out * in), values.subspan(offset + out * in, out),
                  current, spec.activations[l], next);
    offset += out * in + out;
    current = std::move(next);
  }
  return current;
}

void mlp_backward_into(const FlatParams& params, const MlpTape& tape,
                       std::span<const double> output_grad, std::span<double> param_grads,
                       std::span<double> input_grad) {
  const MlpSpec& spec = tape.spec;
  if (tape.params_id != params.id() || tape.params_revision != params.revision()) {
    throw StaleTapeError("mlp_backward: tape was recorded against different parameters");
  }
  if (tape.layer_inputs.size() != spec.num_layers() || params.size() != spec.parameter_count()) {
    throw StaleTapeError("mlp_backward: tape does not match the network shape");
  }
  if (output_grad.size() != spec.output_dim) {
    throw DimensionError("mlp_backward: output gradient has length " +
                         std::to_string(output_grad.size()) + ", expected " +
                         std::to_string(spec.output_dim));
  }
  if (param_grads.size() != params.size()) {
    throw DimensionError("mlp_backward: parameter gradient buffer has wrong length");
  }
  if (!input_grad.empty() && input_grad.size() != spec.input_dim) {
    throw DimensionError("mlp_backward: input gradient buffer has wrong length");
  }

  const auto values = params.values();
  // Offsets of each layer's weight block.
  std::vector<std::size_t> offsets(spec.num_layers());
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
      offsets[l] = off;
      off += spec.layer_output(l) * spec.layer_input(l) + spec.layer_output(l);
    }
  }

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  const std::size_t last_hidden = spec.hidden_dims.size();
  for (std::size_t l = spec.num_layers(); l-- > 0;) {
    const std::size_t in = spec.layer_input(l);
    const std::size_t out = spec.layer_output(l);
    const auto& y = tape.activations[l];
    if (tape.dropout_applied && l + 1 == last_hidden) {
      for (std::size_t o = 0; o < out; ++o) delta[o] *= tape.dropout_scale[o];
    }
    for (std::size_t o = 0; o < out; ++o) {
      delta[o] *= activate_derivative(spec.activations[l], y[o]);
    }
    const auto& a = tape.layer_inputs[l];
    double* dw = param_grads.data() + offsets[l];
    double* db = dw + out * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      db[o] += d;
      if (d == 0.0) continue;
      double* row = dw + o * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += d * a[i];
    }
    if (l == 0 && input_grad.empty()) break;
    std::vector<double> prev(in, 0.0);
    const double* w = values.data() + offsets[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += d * row[i];
    }
    if (l == 0) {
      for (std::size_t i = 0; i < in; ++i) input_grad[i] += prev[i];
    }
    delta = std::move(prev);
  }
}

MlpGradients mlp_backward(const FlatParams& params, const MlpTape& tape,
                          std::span<const double> output_grad) {
  MlpGradients g;
  g.params.assign(params.size(), 0.0);
  g.input.assign(tape.spec.input_dim, 0.0);
  mlp_backward_into(params, tape, output_grad, g.params, g.input);
  return g;
}

}  // namespace phnhvi::numerics
