#include "phnhvi/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "phnhvi/error.hpp"
#include "phnhvi/network.hpp"
#include "phnhvi/preference.hpp"
#include "phnhvi/rng.hpp"
#include "phnhvi/solver.hpp"

namespace phnhvi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Independent substreams of the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kTrainStream = 3;

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + tmp.string());
    f << text;
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

solver::StepReport run_step(solver::TrainState& state, const problems::Problem& problem,
                            const solver::TrainConfig& t, numerics::Rng& rng,
                            const problems::Batch* batch) {
  switch (t.solver) {
    case solver::SolverKind::kPhnHvi:
      return solver::phn_hvi_step(state, problem, t, rng, batch);
    case solver::SolverKind::kPhnLs:
      return solver::phn_ls_step(state, problem, t, rng, batch);
    case solver::SolverKind::kCosmos:
      return solver::cosmos_step(state, problem, t, rng, batch);
    case solver::SolverKind::kStein:
      return solver::stein_step(state, problem, t, rng, batch);
  }
  throw InvalidArgument("unknown solver");
}

std::string metrics_line(const solver::StepReport& r, const char* phase, double lr) {
  json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["iteration"] = r.iteration;
  j["phase"] = phase;
  j["hv"] = r.hv;
  j["mean_cosine"] = r.mean_cosine;
  j["hv_grad_norm"] = r.hv_grad_norm;
  j["cosine_grad_norm"] = r.cosine_grad_norm;
  j["phi_grad_norm"] = r.phi_grad_norm;
  j["lr"] = lr;
  j["ref"] = r.ref;
  json losses = json::array();
  for (std::size_t i = 0; i < r.losses.rows(); ++i) {
    losses.push_back(std::vector<double>(r.losses.row(i).begin(), r.losses.row(i).end()));
  }
  j["losses"] = std::move(losses);
  return j.dump() + "\n";
}

// Cycles through shuffled training rows, one permutation per epoch.
class MinibatchStream {
 public:
  MinibatchStream(std::vector<std::size_t> rows, std::size_t batch_size, numerics::Rng rng)
      : rows_(std::move(rows)), batch_(std::min(batch_size, rows_.size())), rng_(rng) {
    reshuffle();
  }

  std::size_t epoch_iterations() const { return (rows_.size() + batch_ - 1) / batch_; }

  problems::Batch next() {
    if (pos_ >= order_.size()) reshuffle();
    problems::Batch b;
    const std::size_t end = std::min(pos_ + batch_, order_.size());
    for (; pos_ < end; ++pos_) b.rows.push_back(rows_[order_[pos_]]);
    return b;
  }

 private:
  void reshuffle() {
    order_ = numerics::permutation(rows_.size(), rng_);
    pos_ = 0;
  }

  std::vector<std::size_t> rows_;
  std::size_t batch_;
  numerics::Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

// HV of the eval-mode front on the probe rays: validation split when present,
// the problem itself otherwise.
double probe_hv(const network::HypernetParams& hn, const problems::Problem& problem,
                const std::vector<preference::PreferenceVector>& rays,
                const std::vector<double>& ref) {
  const auto val = problem.validation_batch();
  const auto* tabular = dynamic_cast<const problems::TabularProblem*>(&problem);
  numerics::Matrix losses(rays.size(), problem.objectives());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const auto theta = network::predict_theta(hn, rays[i]);
    const auto l = (tabular && val) ? tabular->losses(theta, *val)
                                    : problem.eval(theta, val ? &*val : nullptr).losses;
    if (!numerics::all_finite(l)) {
      throw NumericError("non-finite probe loss on ray " + std::to_string(i),
                         static_cast<std::ptrdiff_t>(i));
    }
    std::copy(l.begin(), l.end(), losses.row(i).begin());
  }
  return hypervolume::hv(losses, ref);
}

std::optional<double> oracle_for(const problems::Problem& problem, const std::vector<double>& ref) {
  if (!problem.has_oracle_front()) return std::nullopt;
  return evalkit::oracle_hv(problem, ref);
}

json metadata(const ExperimentConfig& cfg, std::size_t iteration, double lr) {
  json m;
  m["config"] = json::parse(config_to_json(cfg));
  m["iteration"] = iteration;
  m["lr"] = lr;
  return m;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e) ||
      dynamic_cast<const DimensionError*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitIo;
  }
  return 1;
}

fs::path default_out_root() {
  const char* env = std::getenv(kOutRootEnv);
  return (env && *env) ? fs::path(env) : fs::path("runs");
}

fs::path run_directory(const ExperimentConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  return default_out_root() /
         (cfg.problem + "-" + solver::to_string(cfg.solver) + "-s" + std::to_string(cfg.seed));
}

std::unique_ptr<problems::Problem> make_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "p2") return std::make_unique<problems::Problem2>(cfg.p2_dim);
  if (cfg.problem != "tabular") return problems::make_toy_problem(cfg.problem);
  problems::TabularOptions opt;
  opt.target_columns = cfg.tabular.targets;
  opt.split = {cfg.tabular.split.at(0), cfg.tabular.split.at(1), cfg.tabular.split.at(2)};
  opt.target_scaling = cfg.tabular.divide_by_max ? problems::TargetScaling::kDivideByMax
                                                 : problems::TargetScaling::kNone;
  numerics::Rng split_rng = numerics::Rng(cfg.seed).split(kSplitStream);
  auto data = std::make_shared<problems::TabularDataset>(
      problems::load_tabular(cfg.tabular.data, opt, split_rng));
  return std::make_unique<problems::TabularProblem>(std::move(data), cfg.tabular.hidden);
}

RunResult run_train(const ExperimentConfig& input, std::ostream* log) {
  ExperimentConfig cfg = resolve_defaults(input);
  const auto problem = make_problem(cfg);
  const std::size_t nobj = problem->objectives();
  const auto tcfg_base = to_train_config(cfg, nobj);

  std::optional<MinibatchStream> batches;
  numerics::Rng root(cfg.seed);
  numerics::Rng train_rng = root.split(kTrainStream);
  if (const auto* tab = dynamic_cast<const problems::TabularProblem*>(problem.get())) {
    batches.emplace(tab->data().train, cfg.tabular.batch_size, train_rng.split(1));
    if (!cfg.warmup) {
      cfg.warmup = (cfg.solver == solver::SolverKind::kPhnHvi ||
                    cfg.solver == solver::SolverKind::kStein)
                       ? batches->epoch_iterations()
                       : 0;
    }
    if (cfg.plateau->enabled) cfg.plateau->epoch_iterations = batches->epoch_iterations();
  }

  const fs::path dir = run_directory(cfg);
  fs::create_directories(dir);
  cfg.out = dir.string();
  write_text(dir / "config.json", config_to_json(cfg));

  network::HypernetOptions hopt;
  hopt.hidden = cfg.hypernet_hidden;
  numerics::Rng init_rng = root.split(kInitStream);
  solver::TrainState state(network::init_hypernet(problem->target_spec(), nobj, init_rng, hopt),
                           cfg.lr);
  state.hypernet.seed = cfg.seed;
  auto tcfg = tcfg_base;

  std::ofstream metrics(dir / "metrics.jsonl", std::ios::binary | std::ios::trunc);
  if (!metrics) throw IoError("cannot write " + (dir / "metrics.jsonl").string());
  const fs::path ckpt_path = dir / "checkpoint.json";
  auto save = [&](const network::HypernetParams& hn, std::size_t it) {
    network::save_checkpoint(ckpt_path, {hn, metadata(cfg, it, state.adam.lr).dump()});
  };
  auto next_batch = [&]() -> std::optional<problems::Batch> {
    if (batches) return batches->next();
    return std::nullopt;
  };
  auto emit = [&](const solver::StepReport& r, const char* phase) {
    metrics << metrics_line(r, phase, state.adam.lr);
    if (!metrics) throw IoError("write failed for metrics.jsonl");
    if (log) {
      *log << phase << " " << r.iteration << " hv=" << r.hv << " cos=" << r.mean_cosine << "\n";
    }
  };

  RunResult result;
  result.dir = dir;
  try {
    for (std::size_t w = 0; w < *cfg.warmup; ++w) {
      const auto b = next_batch();
      const auto r = solver::warmup_step(state, *problem, tcfg, train_rng, b ? &*b : nullptr);
      if ((w + 1) % cfg.log_every == 0 || w + 1 == *cfg.warmup) emit(r, "warmup");
    }

    const PlateauRule& plateau = *cfg.plateau;
    const bool select = plateau.enabled;
    const auto probe_rays = preference::test_rays(nobj, nobj == 2 ? 50 : 36);
    std::optional<network::HypernetParams> best;
    double best_hv = -1.0;
    std::size_t since_best = 0;

    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
      const auto b = next_batch();
      const auto r = run_step(state, *problem, tcfg, train_rng, b ? &*b : nullptr);
      result.iterations_run = it;
      if (it % cfg.log_every == 0 || it == cfg.iterations) emit(r, "train");
      if (it % cfg.checkpoint_every == 0) save(state.hypernet, state.adam.step_count);

      if (select && it % plateau.epoch_iterations == 0) {
        const double hv = probe_hv(state.hypernet, *problem, probe_rays, cfg.ref);
        if (hv > best_hv) {
          best_hv = hv;
          best = state.hypernet;
          since_best = 0;
        } else {
          ++since_best;
          if (since_best % plateau.patience == 0) state.adam.lr *= plateau.lr_factor;
          if (since_best >= plateau.early_stop_patience) {
            result.early_stopped = true;
            break;
          }
        }
      }
    }

    network::HypernetParams selected = state.hypernet;
    if (select) {
      const double hv = probe_hv(state.hypernet, *problem, probe_rays, cfg.ref);
      if (best && best_hv >= hv) selected = *best;
    }
    result.final_lr = state.adam.lr;
    save(selected, state.adam.step_count);

    const auto rays = preference::test_rays(nobj, cfg.eval_rays);
    result.report = evalkit::evaluate(selected, *problem, rays, cfg.ref, oracle_for(*problem, cfg.ref));
  } catch (const NumericError&) {
    metrics.flush();
    throw;  // the last periodic checkpoint stays on disk
  }
  metrics.close();
  write_text(dir / "report.json", evalkit::report_to_json(result.report) + "\n");
  evalkit::write_front_csv(dir / "front.csv", result.report);
  return result;
}

evalkit::EvalReport run_eval(const fs::path& checkpoint, std::size_t rays, std::vector<double> ref,
                             fs::path out) {
  const auto ckpt = network::load_checkpoint(checkpoint);
  ExperimentConfig cfg;
  try {
    const auto meta = json::parse(ckpt.metadata_json);
    cfg = config_from_json(meta.at("config").dump());
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint metadata lacks a run config: ") + e.what());
  }
  const auto problem = make_problem(cfg);
  if (problem->objectives() != ckpt.hypernet.objectives ||
      problem->theta_dim() != ckpt.hypernet.target.parameter_count()) {
    throw IoError("checkpoint does not match the problem in its config");
  }
  if (ref.empty()) ref = cfg.ref.empty() ? problem->reference_point() : cfg.ref;
  if (ref.size() != problem->objectives()) {
    throw DimensionError("ref needs " + std::to_string(problem->objectives()) + " entries");
  }
  if (rays == 0) rays = cfg.eval_rays ? cfg.eval_rays : (problem->objectives() == 2 ? 200 : 231);
  const auto test = preference::test_rays(problem->objectives(), rays);
  auto report = evalkit::evaluate(ckpt.hypernet, *problem, test, ref, oracle_for(*problem, ref));
  if (out.empty()) out = checkpoint.parent_path() / "eval";
  fs::create_directories(out);
  write_text(out / "report.json", evalkit::report_to_json(report) + "\n");
  evalkit::write_front_csv(out / "front.csv", report);
  return report;
}

std::vector<RunResult> run_sweep(const ExperimentConfig& base, const std::string& param,
                                 const std::vector<std::string>& values, std::ostream* log) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  const fs::path root = run_directory(base);
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    json patch = json::parse(config_to_json(base));
    try {
      if (param == "rays" || param == "seed") {
        patch[param] = std::stoull(v);
      } else if (param == "lambda" || param == "lr") {
        patch[param] = std::stod(v);
      } else if (param == "partition") {
        if (v != "true" && v != "false") throw ConfigError("sweep: partition takes true/false");
        patch[param] = v == "true";
      } else if (param == "solver") {
        patch[param] = v;
      } else {
        throw ConfigError("sweep: unsupported parameter '" + param + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("sweep: bad value '" + v + "' for " + param);
    }
    patch["out"] = (root / (param + "-" + v)).string();
    configs.push_back(config_from_json(patch.dump()));
  }
  std::vector<RunResult> results;
  for (const auto& c : configs) results.push_back(run_train(c, log));
  return results;
}

}  // namespace phnhvi::cli
