#include "phnhvi/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "phnhvi/error.hpp"

namespace phnhvi::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) {
      throw ConfigError(where + (where.empty() ? "" : ".") + k + ": unknown key");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + (where.empty() ? "" : ".") + key + ": wrong type");
  }
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, key, v, where);
  out = v;
}

void fail(const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); }

bool is_toy(const std::string& problem) {
  return problem == "p1" || problem == "p2" || problem == "p3" || problem == "p4";
}

std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!is_toy(problem) && problem != "tabular") fail("problem", "unknown problem '" + problem + "'");
  if (rays < 1) fail("rays", "must be >= 1");
  if ((solver == solver::SolverKind::kPhnHvi || solver == solver::SolverKind::kStein) && rays < 2) {
    fail("rays", "must be >= 2 for " + solver::to_string(solver));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda", "must be a finite value >= 0");
  if (!(gamma > 0.0)) fail("gamma", "must be > 0");
  if (!(lr > 0.0)) fail("lr", "must be > 0");
  for (double a : alpha) {
    if (!(a > 0.0)) fail("alpha", "entries must be > 0");
  }
  for (double r : ref) {
    if (!std::isfinite(r)) fail("ref", "entries must be finite");
  }
  if (is_toy(problem)) {
    const std::size_t nobj = problem == "p4" ? 3 : 2;
    if (!ref.empty() && ref.size() != nobj) fail("ref", "needs " + std::to_string(nobj) + " entries");
    if (!alpha.empty() && alpha.size() != nobj) fail("alpha", "needs " + std::to_string(nobj) + " entries");
  }
  if (sigma && !(*sigma > 0.0)) fail("sigma", "must be > 0");
  if (iterations < 1) fail("iterations", "must be >= 1");
  if (log_every < 1) fail("log_every", "must be >= 1");
  if (checkpoint_every < 1) fail("checkpoint_every", "must be >= 1");
  if (hypernet_hidden.empty()) fail("hypernet.hidden", "needs at least one layer");
  for (auto h : hypernet_hidden) {
    if (h == 0) fail("hypernet.hidden", "layer widths must be > 0");
  }
  if (p2_dim < 1) fail("p2_dim", "must be >= 1");
  if (plateau) {
    if (plateau->patience < 1) fail("plateau.patience", "must be >= 1");
    if (!(plateau->lr_factor > 0.0)) fail("plateau.lr_factor", "must be > 0");
    if (plateau->epoch_iterations < 1) fail("plateau.epoch_iterations", "must be >= 1");
  }
  if (problem == "tabular") {
    if (tabular.data.empty()) fail("tabular.data", "required for the tabular problem");
    if (tabular.split.size() != 3) fail("tabular.split", "needs three ratios");
    if (tabular.batch_size < 1) fail("tabular.batch_size", "must be >= 1");
  }
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "",
                 {"schema_version", "problem", "solver", "rays", "lambda", "alpha", "ref", "gamma",
                  "lr", "partition", "sigma", "iterations", "warmup", "seed", "eval_rays", "out",
                  "checkpoint_every", "log_every", "hypernet", "p2_dim", "plateau", "tabular"});
  if (j.contains("schema_version") && j["schema_version"] != kConfigSchemaVersion) {
    throw ConfigError("schema_version: unsupported value");
  }
  ExperimentConfig c;
  read(j, "problem", c.problem, "");
  if (j.contains("solver")) {
    std::string s;
    read(j, "solver", s, "");
    try {
      c.solver = solver::solver_from_string(s);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("solver: ") + e.what());
    }
  }
  read(j, "rays", c.rays, "");
  read(j, "lambda", c.lambda, "");
  read(j, "alpha", c.alpha, "");
  read(j, "ref", c.ref, "");
  read(j, "gamma", c.gamma, "");
  read(j, "lr", c.lr, "");
  read(j, "partition", c.partition, "");
  if (j.contains("sigma") && j["sigma"].is_string()) {
    if (j["sigma"] != "median") throw ConfigError("sigma: expected a number or \"median\"");
    c.sigma.reset();
  } else {
    read_optional(j, "sigma", c.sigma, "");
  }
  read(j, "iterations", c.iterations, "");
  read_optional(j, "warmup", c.warmup, "");
  read(j, "seed", c.seed, "");
  read(j, "eval_rays", c.eval_rays, "");
  read(j, "out", c.out, "");
  read(j, "checkpoint_every", c.checkpoint_every, "");
  read(j, "log_every", c.log_every, "");
  read(j, "p2_dim", c.p2_dim, "");
  if (j.contains("hypernet")) {
    const auto& h = j["hypernet"];
    reject_unknown(h, "hypernet", {"hidden"});
    read(h, "hidden", c.hypernet_hidden, "hypernet");
  }
  if (j.contains("plateau") && !j["plateau"].is_null()) {
    const auto& p = j["plateau"];
    reject_unknown(p, "plateau",
                   {"enabled", "patience", "lr_factor", "early_stop_patience", "epoch_iterations"});
    PlateauRule rule;
    read(p, "enabled", rule.enabled, "plateau");
    read(p, "patience", rule.patience, "plateau");
    read(p, "lr_factor", rule.lr_factor, "plateau");
    read(p, "early_stop_patience", rule.early_stop_patience, "plateau");
    read(p, "epoch_iterations", rule.epoch_iterations, "plateau");
    c.plateau = rule;
  }
  if (j.contains("tabular")) {
    const auto& t = j["tabular"];
    reject_unknown(t, "tabular", {"data", "targets", "divide_by_max", "split", "hidden", "batch_size"});
    read(t, "data", c.tabular.data, "tabular");
    read(t, "targets", c.tabular.targets, "tabular");
    read(t, "divide_by_max", c.tabular.divide_by_max, "tabular");
    read(t, "split", c.tabular.split, "tabular");
    read(t, "hidden", c.tabular.hidden, "tabular");
    read(t, "batch_size", c.tabular.batch_size, "tabular");
  }
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["problem"] = c.problem;
  j["solver"] = solver::to_string(c.solver);
  j["rays"] = c.rays;
  j["lambda"] = c.lambda;
  j["alpha"] = c.alpha;
  j["ref"] = c.ref;
  j["gamma"] = c.gamma;
  j["lr"] = c.lr;
  j["partition"] = c.partition;
  j["sigma"] = c.sigma ? json(*c.sigma) : json("median");
  j["iterations"] = c.iterations;
  j["warmup"] = c.warmup ? json(*c.warmup) : json(nullptr);
  j["seed"] = c.seed;
  j["eval_rays"] = c.eval_rays;
  j["out"] = c.out;
  j["checkpoint_every"] = c.checkpoint_every;
  j["log_every"] = c.log_every;
  j["hypernet"] = {{"hidden", c.hypernet_hidden}};
  j["p2_dim"] = c.p2_dim;
  if (c.plateau) {
    j["plateau"] = {{"enabled", c.plateau->enabled},
                    {"patience", c.plateau->patience},
                    {"lr_factor", c.plateau->lr_factor},
                    {"early_stop_patience", c.plateau->early_stop_patience},
                    {"epoch_iterations", c.plateau->epoch_iterations}};
  } else {
    j["plateau"] = nullptr;
  }
  j["tabular"] = {{"data", c.tabular.data},
                  {"targets", c.tabular.targets},
                  {"divide_by_max", c.tabular.divide_by_max},
                  {"split", c.tabular.split},
                  {"hidden", c.tabular.hidden},
                  {"batch_size", c.tabular.batch_size}};
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::size_t objectives_of(const ExperimentConfig& cfg) {
  if (cfg.problem == "p4") return 3;
  if (is_toy(cfg.problem)) return 2;
  if (!cfg.tabular.targets.empty()) return cfg.tabular.targets.size();
  std::size_t n = 0;
  for (const auto& name : csv_header(cfg.tabular.data)) n += (!name.empty() && name[0] == 'y') ? 1 : 0;
  return n;
}

ExperimentConfig resolve_defaults(ExperimentConfig c) {
  c.validate();
  if (c.problem == "tabular" && c.tabular.targets.empty()) {
    for (const auto& name : csv_header(c.tabular.data)) {
      if (!name.empty() && name[0] == 'y') c.tabular.targets.push_back(name);
    }
    if (c.tabular.targets.size() < 2) fail("tabular.targets", "need at least two target columns");
  }
  const std::size_t nobj = objectives_of(c);
  if (c.alpha.empty()) c.alpha = solver::default_alpha(c.solver, nobj);
  if (c.alpha.size() != nobj) fail("alpha", "needs " + std::to_string(nobj) + " entries");
  if (c.ref.empty()) c.ref.assign(nobj, c.problem == "tabular" ? 1.0 : 2.0);
  if (c.ref.size() != nobj) fail("ref", "needs " + std::to_string(nobj) + " entries");
  const bool multi_sample =
      c.solver == solver::SolverKind::kPhnHvi || c.solver == solver::SolverKind::kStein;
  if (!c.warmup && is_toy(c.problem)) c.warmup = multi_sample ? 500 : 0;
  if (!c.warmup && !multi_sample) c.warmup = 0;
  // Tabular warm-up defaults to one epoch; the runner resolves it once the
  // split size is known.
  if (!c.plateau) {
    PlateauRule rule;
    rule.enabled = c.problem == "tabular";
    c.plateau = rule;
  }
  if (c.eval_rays == 0) c.eval_rays = nobj == 2 ? 200 : 231;
  return c;
}

solver::TrainConfig to_train_config(const ExperimentConfig& c, std::size_t objectives) {
  solver::TrainConfig t;
  t.solver = c.solver;
  t.rays = c.rays;
  t.lambda = c.lambda;
  t.alpha = c.alpha.empty() ? solver::default_alpha(c.solver, objectives) : c.alpha;
  t.ref_point = c.ref.empty() ? std::vector<double>(objectives, 2.0) : c.ref;
  t.gamma = c.gamma;
  t.lr = c.lr;
  t.partition = c.partition;
  t.sigma = c.sigma;
  t.validate(objectives);
  return t;
}

}  // namespace phnhvi::cli
