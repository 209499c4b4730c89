// Command line driver: train, eval, hv, rays, sweep.
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "phnhvi/config.hpp"
#include "phnhvi/error.hpp"
#include "phnhvi/evalkit.hpp"
#include "phnhvi/hypervolume.hpp"
#include "phnhvi/preference.hpp"
#include "phnhvi/runner.hpp"

namespace {

using nlohmann::json;
namespace pc = phnhvi::cli;

// Flags that override config-file values. Unset flags leave the file alone.
struct TrainFlags {
  std::string config;
  std::optional<std::string> problem, solver, out, tabular_data, sigma;
  std::optional<std::size_t> rays, iterations, warmup, eval_rays, checkpoint_every, log_every;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda, gamma, lr;
  std::vector<double> alpha, ref;
  std::optional<bool> partition;
  bool divide_by_max = false;
  bool quiet = false;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config, "JSON config file; flags override its values");
    app.add_option("--problem", problem, "p1, p2, p3, p4 or tabular");
    app.add_option("--solver", solver, "phn-hvi, phn-ls, cosmos or stein");
    app.add_option("--rays", rays, "Rays per step (p)");
    app.add_option("--lambda", lambda, "Cosine alignment weight");
    app.add_option("--alpha", alpha, "Dirichlet concentration, comma separated")->delimiter(',');
    app.add_option("--ref", ref, "Reference point, comma separated")->delimiter(',');
    app.add_option("--gamma", gamma, "Temporary reference rescale factor");
    app.add_option("--lr", lr, "Adam learning rate");
    app.add_option("--partition", partition, "Angular partition sampling for two objectives");
    app.add_option("--sigma", sigma, "Stein bandwidth or 'median'");
    app.add_option("--iters,--iterations", iterations, "Main-loop iterations");
    app.add_option("--warmup", warmup, "Warm-up iterations");
    app.add_option("--seed", seed, "Run seed");
    app.add_option("--eval-rays", eval_rays, "Test rays for the final report");
    app.add_option("--out", out, "Run directory");
    app.add_option("--checkpoint-every", checkpoint_every, "Checkpoint cadence in iterations");
    app.add_option("--log-every", log_every, "Metrics cadence in iterations");
    app.add_option("--tabular-data", tabular_data, "CSV for the tabular problem");
    app.add_flag("--divide-by-max", divide_by_max, "Scale tabular targets by their train max");
    app.add_flag("-q,--quiet", quiet, "No progress output");
  }

  pc::ExperimentConfig build() const {
    json j = json::object();
    if (!config.empty()) {
      std::ifstream in(config, std::ios::binary);
      if (!in) throw phnhvi::IoError("cannot read config " + config);
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        j = json::parse(ss.str());
      } catch (const json::exception& e) {
        throw phnhvi::ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (problem) j["problem"] = *problem;
    if (solver) j["solver"] = *solver;
    if (rays) j["rays"] = *rays;
    if (lambda) j["lambda"] = *lambda;
    if (!alpha.empty()) j["alpha"] = alpha;
    if (!ref.empty()) j["ref"] = ref;
    if (gamma) j["gamma"] = *gamma;
    if (lr) j["lr"] = *lr;
    if (partition) j["partition"] = *partition;
    if (sigma) {
      if (*sigma == "median") {
        j["sigma"] = "median";
      } else {
        try {
          j["sigma"] = std::stod(*sigma);
        } catch (const std::logic_error&) {
          throw phnhvi::ConfigError("sigma: expected a number or \"median\"");
        }
      }
    }
    if (iterations) j["iterations"] = *iterations;
    if (warmup) j["warmup"] = *warmup;
    if (seed) j["seed"] = *seed;
    if (eval_rays) j["eval_rays"] = *eval_rays;
    if (out) j["out"] = *out;
    if (checkpoint_every) j["checkpoint_every"] = *checkpoint_every;
    if (log_every) j["log_every"] = *log_every;
    if (tabular_data) j["tabular"]["data"] = *tabular_data;
    if (divide_by_max) j["tabular"]["divide_by_max"] = true;
    return pc::config_from_json(j.dump());
  }
};

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void print_summary(const phnhvi::evalkit::EvalReport& r, const std::filesystem::path& dir) {
  std::cout << "run: " << dir.string() << "\n";
  std::cout << "hv: " << format_real(r.hv) << "\n";
  if (r.oracle_hv) std::cout << "oracle_hv: " << format_real(*r.oracle_hv) << "\n";
  if (r.hv_ratio) std::cout << "hv_ratio: " << format_real(*r.hv_ratio) << "\n";
  std::cout << "mean_cosine: " << format_real(r.mean_cosine()) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pareto front learning with hypervolume-driven hypernetworks"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train a hypernetwork and evaluate it");
  train_flags.attach(*train);

  TrainFlags sweep_flags;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "One training run per value of a parameter");
  sweep_flags.attach(*sweep);
  sweep->add_option("--param", sweep_param, "rays, lambda, lr, seed, partition or solver")
      ->required();
  sweep->add_option("--values", sweep_values, "Comma separated values")
      ->delimiter(',')
      ->required();

  std::string ckpt;
  std::size_t eval_rays = 0;
  std::vector<double> eval_ref;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Re-evaluate a checkpoint");
  eval->add_option("--checkpoint", ckpt, "checkpoint.json from a run")->required();
  eval->add_option("--rays", eval_rays, "Number of test rays (default: as trained)");
  eval->add_option("--ref", eval_ref, "Reference point")->delimiter(',');
  eval->add_option("--out", eval_out, "Output directory (default: <checkpoint dir>/eval)");

  std::string points;
  std::vector<double> hv_ref;
  auto* hv = app.add_subcommand("hv", "Hypervolume of a CSV of points");
  hv->add_option("--points", points, "CSV with one point per row")->required();
  hv->add_option("--ref", hv_ref, "Reference point")->delimiter(',')->required();

  std::size_t ray_objectives = 2;
  std::size_t ray_count = 200;
  std::string ray_out;
  auto* rays = app.add_subcommand("rays", "Print evaluation rays as CSV");
  rays->add_option("-J,--objectives", ray_objectives, "Number of objectives");
  rays->add_option("-n,--count", ray_count, "Ray count (lattice size hint when J > 2)");
  rays->add_option("--out", ray_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pc::kExitConfig;
  }

  try {
    if (*train) {
      const auto cfg = train_flags.build();
      const auto result = pc::run_train(cfg, train_flags.quiet ? nullptr : &std::cerr);
      print_summary(result.report, result.dir);
    } else if (*sweep) {
      const auto base = sweep_flags.build();
      const auto results =
          pc::run_sweep(base, sweep_param, sweep_values, sweep_flags.quiet ? nullptr : &std::cerr);
      for (const auto& r : results) print_summary(r.report, r.dir);
    } else if (*eval) {
      const auto report = pc::run_eval(ckpt, eval_rays, eval_ref, eval_out);
      print_summary(report, eval_out.empty() ? std::filesystem::path(ckpt).parent_path() / "eval"
                                             : std::filesystem::path(eval_out));
    } else if (*hv) {
      const auto pts = phnhvi::evalkit::read_points_csv(points);
      if (pts.rows() == 0) {
        std::cout << "0.0\n";
      } else {
        std::cout << format_real(phnhvi::hypervolume::hv(pts, hv_ref)) << "\n";
      }
    } else if (*rays) {
      const auto rs = phnhvi::preference::test_rays(ray_objectives, ray_count);
      std::ostringstream csv;
      for (std::size_t j = 1; j <= ray_objectives; ++j) csv << (j > 1 ? "," : "") << "r_" << j;
      csv << "\n";
      for (const auto& r : rs) {
        for (std::size_t j = 0; j < r.size(); ++j) csv << (j ? "," : "") << format_real(r[j]);
        csv << "\n";
      }
      if (ray_out.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream f(ray_out, std::ios::binary | std::ios::trunc);
        if (!f || !(f << csv.str())) throw phnhvi::IoError("cannot write " + ray_out);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pc::exit_code_for(e);
  }
  return 0;
}
