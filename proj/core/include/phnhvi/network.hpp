#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "phnhvi/mlp.hpp"
#include "phnhvi/preference.hpp"
#include "phnhvi/rng.hpp"

namespace phnhvi::network {

using numerics::FlatParams;
using numerics::MlpSpec;

enum class Squash {
  kNone,
  kSigmoid,  // componentwise logistic, maps into (0, 1)
  kNoneBox,  // identity; the problem rejects values outside its box
};

std::string to_string(Squash s);
Squash squash_from_string(const std::string& name);

/// What the hypernetwork emits: a raw decision vector or the weights of a target MLP.
struct TargetSpec {
  enum class Kind { kRawVector, kMlp };

  Kind kind = Kind::kRawVector;
  std::size_t dim = 1;
  Squash squash = Squash::kNone;
  MlpSpec mlp;

  static TargetSpec raw_vector(std::size_t dim, Squash squash = Squash::kNone);
  static TargetSpec mlp_target(MlpSpec spec);

  std::size_t parameter_count() const;
  void validate() const;

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct HypernetOptions {
  std::vector<std::size_t> hidden = {100, 100};
  numerics::Activation activation = numerics::Activation::kRelu;
  double dropout = 0.0;
};

/// h(r, phi): an MLP from J preference weights to the target parameter vector.
/// The trunk is shared; the single linear head is sliced by the target layout.
struct HypernetParams {
  TargetSpec target;
  std::size_t objectives = 2;
  MlpSpec spec;
  FlatParams params;
  std::uint64_t seed = 0;
};

/// Kaiming-uniform initialized hypernetwork; deterministic in the rng state.
HypernetParams init_hypernet(const TargetSpec& target, std::size_t objectives,
                             numerics::Rng& rng, const HypernetOptions& options = {});

/// Realized target parameters theta.
struct TargetWeights {
  TargetSpec spec;
  std::vector<double> theta;
};

/// Target MLP weights as FlatParams with the standard layer layout.
FlatParams unflatten(const TargetSpec& spec, std::span<const double> theta);
std::vector<double> flatten(const FlatParams& params);

struct TargetTape {
  numerics::MlpTape mlp;
  Squash squash = Squash::kNone;
  std::vector<double> theta;  // post-squash values, needed for the sigmoid chain rule
};

struct GeneratedTarget {
  TargetWeights weights;
  TargetTape tape;
};

/// Forward pass of the hypernetwork on ray r. Throws DimensionError if r
/// does not have `objectives` entries.
GeneratedTarget generate_target(const HypernetParams& hn, const preference::PreferenceVector& r,
                                numerics::Rng& rng, bool train_mode);

/// Eval-mode theta without a tape.
std::vector<double> predict_theta(const HypernetParams& hn, const preference::PreferenceVector& r);

/// Gradient of <dloss_dtheta, theta> w.r.t. phi.
std::vector<double> backprop_to_phi(const HypernetParams& hn, const TargetTape& tape,
                                    std::span<const double> dloss_dtheta);
/// Accumulating variant.
void backprop_to_phi_into(const HypernetParams& hn, const TargetTape& tape,
                          std::span<const double> dloss_dtheta, std::span<double> phi_grad);

inline constexpr int kCheckpointSchemaVersion = 1;

/// Hypernetwork plus opaque run metadata (a JSON document chosen by the caller).
struct Checkpoint {
  HypernetParams hypernet;
  std::string metadata_json = "{}";
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
/// Throws IoError when the file cannot be written or read.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace phnhvi::network
