#pragma once

#include <cstddef>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "phnhvi/config.hpp"
#include "phnhvi/evalkit.hpp"
#include "phnhvi/problems.hpp"

namespace phnhvi::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitIo = 4 };

/// Maps library exceptions to process exit codes.
int exit_code_for(const std::exception& e);

inline constexpr int kMetricsSchemaVersion = 1;
inline constexpr const char* kOutRootEnv = "PHNHVI_OUT_ROOT";

std::filesystem::path default_out_root();
/// cfg.out, or <out root>/<problem>-<solver>-s<seed> when empty.
std::filesystem::path run_directory(const ExperimentConfig& cfg);

/// Builds the problem a config describes; tabular data is split with a
/// stream derived from cfg.seed.
std::unique_ptr<problems::Problem> make_problem(const ExperimentConfig& cfg);

struct RunResult {
  std::filesystem::path dir;
  evalkit::EvalReport report;
  std::size_t iterations_run = 0;  // main-loop iterations, warm-up excluded
  double final_lr = 0.0;
  bool early_stopped = false;
};

/// Warm-up, main loop, model selection, final evaluation. Writes
/// config.json, metrics.jsonl, checkpoint.json, report.json and front.csv
/// into the run directory. `log` receives one progress line per log interval.
RunResult run_train(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Re-evaluates a checkpoint. `rays` 0 and empty `ref` fall back to the
/// training config stored in the checkpoint; `out` defaults to
/// <checkpoint dir>/eval. Nothing is written if the checkpoint cannot be read.
evalkit::EvalReport run_eval(const std::filesystem::path& checkpoint, std::size_t rays,
                             std::vector<double> ref, std::filesystem::path out);

/// One run per value of `param` (rays, lambda, lr, seed, partition, solver),
/// each in <base out>/<param>-<value>.
std::vector<RunResult> run_sweep(const ExperimentConfig& base, const std::string& param,
                                 const std::vector<std::string>& values,
                                 std::ostream* log = nullptr);

}  // namespace phnhvi::cli
