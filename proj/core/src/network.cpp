#include "phnhvi/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "phnhvi/error.hpp"

namespace phnhvi::network {

using nlohmann::json;

std::string to_string(Squash s) {
  switch (s) {
    case Squash::kNone:
      return "none";
    case Squash::kSigmoid:
      return "sigmoid";
    case Squash::kNoneBox:
      return "none_box";
  }
  return "none";
}

Squash squash_from_string(const std::string& name) {
  if (name == "none") return Squash::kNone;
  if (name == "sigmoid") return Squash::kSigmoid;
  if (name == "none_box") return Squash::kNoneBox;
  throw InvalidArgument("unknown squash '" + name + "'");
}

TargetSpec TargetSpec::raw_vector(std::size_t dim, Squash squash) {
  TargetSpec t;
  t.kind = Kind::kRawVector;
  t.dim = dim;
  t.squash = squash;
  t.validate();
  return t;
}

TargetSpec TargetSpec::mlp_target(MlpSpec spec) {
  TargetSpec t;
  t.kind = Kind::kMlp;
  spec.validate();
  t.dim = spec.parameter_count();
  t.mlp = std::move(spec);
  return t;
}

std::size_t TargetSpec::parameter_count() const {
  return kind == Kind::kRawVector ? dim : mlp.parameter_count();
}

void TargetSpec::validate() const {
  if (kind == Kind::kRawVector) {
    if (dim == 0) throw InvalidArgument("TargetSpec: raw vector needs d >= 1");
  } else {
    mlp.validate();
    if (squash != Squash::kNone) {
      throw InvalidArgument("TargetSpec: squash applies to raw vectors only");
    }
  }
}

HypernetParams init_hypernet(const TargetSpec& target, std::size_t objectives,
                             numerics::Rng& rng, const HypernetOptions& options) {
  target.validate();
  if (objectives < 2) throw InvalidArgument("init_hypernet: need at least two objectives");
  HypernetParams hn;
  hn.target = target;
  hn.objectives = objectives;
  hn.spec = MlpSpec::make(objectives, options.hidden, target.parameter_count(),
                          options.activation, options.dropout);
  hn.params = numerics::make_mlp_params(hn.spec);
  hn.seed = rng.seed();
  numerics::init_kaiming_uniform(hn.spec, hn.params, rng);
  return hn;
}

FlatParams unflatten(const TargetSpec& spec, std::span<const double> theta) {
  if (theta.size() != spec.parameter_count()) {
    throw DimensionError("unflatten: theta has " + std::to_string(theta.size()) +
                         " entries, target needs " + std::to_string(spec.parameter_count()));
  }
  std::vector<double> values(theta.begin(), theta.end());
  if (spec.kind == TargetSpec::Kind::kMlp) {
    return FlatParams(numerics::mlp_layout(spec.mlp), std::move(values));
  }
  return FlatParams({{"theta", {spec.dim}, 0}}, std::move(values));
}

std::vector<double> flatten(const FlatParams& params) {
  return {params.values().begin(), params.values().end()};
}

namespace {

void check_ray(const HypernetParams& hn, const preference::PreferenceVector& r) {
  if (r.size() != hn.objectives) {
    throw DimensionError("generate_target: ray has " + std::to_string(r.size()) +
                         " weights, hypernetwork expects " + std::to_string(hn.objectives));
  }
}

void apply_squash(Squash s, std::vector<double>& theta) {
  if (s != Squash::kSigmoid) return;
  for (double& t : theta) t = 1.0 / (1.0 + std::exp(-t));
}

}  // namespace

GeneratedTarget generate_target(const HypernetParams& hn, const preference::PreferenceVector& r,
                                numerics::Rng& rng, bool train_mode) {
  check_ray(hn, r);
  auto fwd = numerics::mlp_forward(hn.spec, hn.params, r, rng, train_mode);
  GeneratedTarget out;
  apply_squash(hn.target.squash, fwd.output);
  out.weights.spec = hn.target;
  out.weights.theta = fwd.output;
  out.tape.mlp = std::move(fwd.tape);
  out.tape.squash = hn.target.squash;
  out.tape.theta = std::move(fwd.output);
  return out;
}

std::vector<double> predict_theta(const HypernetParams& hn, const preference::PreferenceVector& r) {
  check_ray(hn, r);
  auto theta = numerics::mlp_predict(hn.spec, hn.params, r);
  apply_squash(hn.target.squash, theta);
  return theta;
}

void backprop_to_phi_into(const HypernetParams& hn, const TargetTape& tape,
                          std::span<const double> dloss_dtheta, std::span<double> phi_grad) {
  if (dloss_dtheta.size() != tape.theta.size()) {
    throw DimensionError("backprop_to_phi: gradient has " + std::to_string(dloss_dtheta.size()) +
                         " entries, theta has " + std::to_string(tape.theta.size()));
  }
  if (tape.squash == Squash::kSigmoid) {
    std::vector<double> pre(dloss_dtheta.size());
    for (std::size_t k = 0; k < pre.size(); ++k) {
      const double t = tape.theta[k];
      pre[k] = dloss_dtheta[k] * t * (1.0 - t);
    }
    numerics::mlp_backward_into(hn.params, tape.mlp, pre, phi_grad);
    return;
  }
  numerics::mlp_backward_into(hn.params, tape.mlp, dloss_dtheta, phi_grad);
}

std::vector<double> backprop_to_phi(const HypernetParams& hn, const TargetTape& tape,
                                    std::span<const double> dloss_dtheta) {
  std::vector<double> grad(hn.params.size(), 0.0);
  backprop_to_phi_into(hn, tape, dloss_dtheta, grad);
  return grad;
}

namespace {

json mlp_spec_to_json(const MlpSpec& spec) {
  json acts = json::array();
  for (auto a : spec.activations) acts.push_back(numerics::to_string(a));
  return {{"input_dim", spec.input_dim},
          {"hidden_dims", spec.hidden_dims},
          {"output_dim", spec.output_dim},
          {"activations", acts},
          {"dropout_rate", spec.dropout_rate}};
}

MlpSpec mlp_spec_from_json(const json& j) {
  MlpSpec spec;
  spec.input_dim = j.at("input_dim").get<std::size_t>();
  spec.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  spec.output_dim = j.at("output_dim").get<std::size_t>();
  for (const auto& a : j.at("activations")) {
    spec.activations.push_back(numerics::activation_from_string(a.get<std::string>()));
  }
  spec.dropout_rate = j.at("dropout_rate").get<double>();
  spec.validate();
  return spec;
}

json target_to_json(const TargetSpec& t) {
  json j = {{"kind", t.kind == TargetSpec::Kind::kRawVector ? "raw_vector" : "mlp"},
            {"dim", t.dim},
            {"squash", to_string(t.squash)}};
  if (t.kind == TargetSpec::Kind::kMlp) j["mlp"] = mlp_spec_to_json(t.mlp);
  return j;
}

TargetSpec target_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "raw_vector") {
    return TargetSpec::raw_vector(j.at("dim").get<std::size_t>(),
                                  squash_from_string(j.at("squash").get<std::string>()));
  }
  if (kind == "mlp") return TargetSpec::mlp_target(mlp_spec_from_json(j.at("mlp")));
  throw InvalidArgument("unknown target kind '" + kind + "'");
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& hn = ckpt.hypernet;
  json layout = json::array();
  for (const auto& e : hn.params.layout()) {
    layout.push_back({{"name", e.name}, {"shape", e.shape}, {"offset", e.offset}});
  }
  json values(std::vector<double>(hn.params.values().begin(), hn.params.values().end()));
  json doc = {{"schema_version", kCheckpointSchemaVersion},
              {"objectives", hn.objectives},
              {"seed", hn.seed},
              {"target", target_to_json(hn.target)},
              {"spec", mlp_spec_to_json(hn.spec)},
              {"layout", layout},
              {"values", values},
              {"metadata", json::parse(ckpt.metadata_json)}};
  return doc.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != kCheckpointSchemaVersion) {
      throw IoError("checkpoint: unsupported schema_version");
    }
    Checkpoint ckpt;
    auto& hn = ckpt.hypernet;
    hn.objectives = doc.at("objectives").get<std::size_t>();
    hn.seed = doc.at("seed").get<std::uint64_t>();
    hn.target = target_from_json(doc.at("target"));
    hn.spec = mlp_spec_from_json(doc.at("spec"));
    std::vector<numerics::LayoutEntry> layout;
    for (const auto& e : doc.at("layout")) {
      layout.push_back({e.at("name").get<std::string>(),
                        e.at("shape").get<std::vector<std::size_t>>(),
                        e.at("offset").get<std::size_t>()});
    }
    if (layout != numerics::mlp_layout(hn.spec)) {
      throw IoError("checkpoint: layout table does not match the stored network spec");
    }
    if (hn.spec.input_dim != hn.objectives ||
        hn.spec.output_dim != hn.target.parameter_count()) {
      throw IoError("checkpoint: network spec does not match objectives/target");
    }
    hn.params = FlatParams(std::move(layout), doc.at("values").get<std::vector<double>>());
    ckpt.metadata_json = doc.at("metadata").dump();
    return ckpt;
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto text = checkpoint_to_json(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out << text;
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace phnhvi::network
