#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phnhvi/solver.hpp"

namespace phnhvi::cli {

inline constexpr int kConfigSchemaVersion = 1;

/// Learning-rate decay and early stopping driven by a periodic probe HV
/// (validation split when the problem has one, training rays otherwise).
struct PlateauRule {
  bool enabled = false;
  std::size_t patience = 10;             // probes without improvement before decaying lr
  double lr_factor = 0.70710678118654752;  // 1/sqrt(2)
  std::size_t early_stop_patience = 35;  // probes without improvement before stopping
  std::size_t epoch_iterations = 100;    // probe cadence for dataset-free problems
};

struct TabularSettings {
  std::string data;                      // CSV path
  std::vector<std::string> targets;      // empty: every column whose name starts with 'y'
  bool divide_by_max = false;
  std::vector<double> split = {0.65, 0.15, 0.20};
  std::vector<std::size_t> hidden = {32, 32};
  std::size_t batch_size = 64;
};

struct ExperimentConfig {
  std::string problem = "p1";
  solver::SolverKind solver = solver::SolverKind::kPhnHvi;
  std::size_t rays = 4;
  double lambda = 1.0;
  std::vector<double> alpha;             // empty: solver default
  std::vector<double> ref;               // empty: problem default
  double gamma = 1.1;
  double lr = 1e-3;
  bool partition = true;
  std::optional<double> sigma;           // empty: median heuristic
  std::size_t iterations = 10000;
  std::optional<std::size_t> warmup;     // iterations; empty: solver/problem default
  std::uint64_t seed = 42;
  std::size_t eval_rays = 0;             // 0: 200 for two objectives, lattice of >= 231 otherwise
  std::string out;                       // empty: $PHNHVI_OUT_ROOT (or "runs") / <problem>-<solver>-s<seed>
  std::size_t checkpoint_every = 1000;
  std::size_t log_every = 100;
  std::vector<std::size_t> hypernet_hidden = {100, 100};
  std::size_t p2_dim = 100;
  std::optional<PlateauRule> plateau;    // empty: on for tabular problems, off for toys
  TabularSettings tabular;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses a JSON document; unknown keys are rejected with ConfigError.
ExperimentConfig config_from_json(const std::string& text);
/// Fully resolved snapshot including schema_version.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Number of objectives implied by the config (reads the CSV header for
/// tabular problems).
std::size_t objectives_of(const ExperimentConfig& cfg);

/// Fills alpha, ref, warmup, plateau and eval_rays with their defaults.
ExperimentConfig resolve_defaults(ExperimentConfig cfg);

solver::TrainConfig to_train_config(const ExperimentConfig& cfg, std::size_t objectives);

}  // namespace phnhvi::cli
