// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "phnhvi/config.hpp"
#include "phnhvi/evalkit.hpp"
#include "phnhvi/hypervolume.hpp"
#include "phnhvi/preference.hpp"
#include "phnhvi/runner.hpp"
#include "phnhvi/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using phnhvi::numerics::Matrix;
using phnhvi::numerics::Rng;
namespace hvlib = phnhvi::hypervolume;
namespace cli = phnhvi::cli;
namespace evalkit = phnhvi::evalkit;
namespace problems = phnhvi::problems;
namespace solver = phnhvi::solver;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Uniform sampling of [0, ref]; returns (volume estimate, standard error).
template <typename F>
std::pair<double, double> monte_carlo(const std::vector<double>& ref, std::size_t samples,
                                      std::uint64_t seed, F&& dominated) {
  Rng rng(seed);
  double box = 1.0;
  for (double r : ref) box *= r;
  std::vector<double> z(ref.size());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < ref.size(); ++j) z[j] = rng.uniform(0.0, ref[j]);
    hits += dominated(z) ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * p, box * std::sqrt(p * (1 - p) / static_cast<double>(samples))};
}

bool weakly_dominated_by_any(const Matrix& pts, const std::vector<double>& z) {
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < z.size() && all; ++j) all = pts(i, j) <= z[j];
    if (all) return true;
  }
  return false;
}

Matrix random_points(Rng& rng, std::size_t n, std::size_t dim, double lo, double hi) {
  Matrix m(n, dim);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

Outcome hv_oracle_equivalence() {
  Rng rng(101);
  double worst = 0.0;
  int bad = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t dim = 2 + static_cast<std::size_t>(t % 3);
    const std::size_t n = 1 + rng.below(8);
    const auto pts = random_points(rng, n, dim, 0.0, 2.0);
    const std::vector<double> ref(dim, 2.0);
    const double exact = hvlib::hv(pts, ref);
    const auto [mc, se] = monte_carlo(ref, 1'000'000, 1000 + t,
                                      [&](const std::vector<double>& z) { return weakly_dominated_by_any(pts, z); });
    const double z = se > 0 ? std::abs(exact - mc) / se : (exact == mc ? 0.0 : 1e9);
    worst = std::max(worst, z);
    bad += z > 3.0 ? 1 : 0;
  }
  return {bad == 0, fmt("50 sets, worst |exact - MC| = %.2f SE, %d outside 3 SE", worst, bad)};
}

Matrix separated_front(Rng& rng, std::size_t n, std::size_t dim, double gap) {
  while (true) {
    auto pts = random_points(rng, n, dim, 0.1, 1.9);
    bool ok = true;
    for (std::size_t j = 0; j < dim && ok; ++j) {
      for (std::size_t a = 0; a < n && ok; ++a) {
        for (std::size_t b = a + 1; b < n && ok; ++b) ok = std::abs(pts(a, j) - pts(b, j)) >= gap;
      }
    }
    if (!ok) continue;
    const auto mask = hvlib::filter_nondominated(pts);
    if (std::all_of(mask.begin(), mask.end(), [](bool b) { return b; })) return pts;
  }
}

Outcome hv_gradient_correctness() {
  Rng rng(202);
  const double h = 1e-6;
  double worst = 0.0;
  std::size_t entries = 0;
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 2 + static_cast<std::size_t>(t % 3);
    const std::size_t n = 2 + rng.below(dim == 2 ? 7 : 5);
    const auto pts = separated_front(rng, n, dim, 1e-2);
    const std::vector<double> ref(dim, 2.0);
    const auto g = hvlib::hv_gradient(pts, ref);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        Matrix plus = pts;
        Matrix minus = pts;
        plus(i, j) += h;
        minus(i, j) -= h;
        const double fd = (hvlib::hv(plus, ref) - hvlib::hv(minus, ref)) / (2 * h);
        const double e = rel_err(fd, g(i, j));
        worst = std::max(worst, e);
        bad += e > 1e-5 ? 1 : 0;
        ++entries;
      }
    }
  }
  return {bad == 0, fmt("100 configurations, %zu entries, worst rel err %.2e, %d above 1e-5",
                        entries, worst, bad)};
}

Outcome lattice_count() {
  const auto lat = phnhvi::preference::das_dennis_lattice({3, 20});
  bool simplex = true;
  for (const auto& r : lat) simplex = simplex && phnhvi::preference::on_simplex(r);
  return {lat.size() == 231 && simplex, fmt("%zu points, all on simplex: %s", lat.size(), simplex ? "yes" : "no")};
}

cli::ExperimentConfig toy_config(const std::string& problem, const std::string& solver_name,
                                 std::size_t rays, double lambda, std::uint64_t seed,
                                 const fs::path& out) {
  json j = {{"problem", problem}, {"solver", solver_name}, {"rays", rays}, {"lambda", lambda},
            {"seed", seed}, {"iterations", 10000}, {"log_every", 500}};
  auto cfg = cli::config_from_json(j.dump());
  cfg.out = out.string();
  return cfg;
}

struct Context {
  fs::path work;
  // Shared between criteria 4 and 11.
  fs::path p1_run;
  std::string p1_config;
};

Outcome problem1_convergence(Context& ctx) {
  problems::Problem1 p;
  const std::vector<double> ref{2, 2};
  const double oracle = evalkit::oracle_hv(p, ref);
  // Second, independent oracle: the dominated region is sqrt(z1) + sqrt(z2) >= 1.
  const auto [mc, se] = monte_carlo(ref, 1'000'000, 404, [](const std::vector<double>& z) {
    return std::sqrt(z[0]) + std::sqrt(z[1]) >= 1.0;
  });
  const bool oracles_agree = std::abs(oracle - mc) <= 3 * se + evalkit::kOracleTolerance;

  ctx.p1_run = ctx.work / "c4_p1";
  auto cfg = toy_config("p1", "phn-hvi", 4, 1.0, 42, ctx.p1_run);
  ctx.p1_config = cli::config_to_json(cfg);
  const auto res = cli::run_train(cfg);
  const double ratio = res.report.hv / oracle;
  return {oracles_agree && ratio >= 0.98 && res.report.ray_count() == 200,
          fmt("hv %.6f, oracle %.6f (MC %.6f +- %.6f), hv_ratio %.5f >= 0.98", res.report.hv,
              oracle, mc, se, ratio)};
}

Outcome problem2_separation(Context& ctx) {
  problems::Problem2 p;
  const std::vector<double> ref{2, 2};
  const double oracle = evalkit::oracle_hv(p, ref);
  const auto hvi = cli::run_train(toy_config("p2", "phn-hvi", 4, 1.0, 42, ctx.work / "c5_hvi"));
  const auto ls = cli::run_train(toy_config("p2", "phn-ls", 4, 1.0, 42, ctx.work / "c5_ls"));
  const double r_hvi = hvi.report.hv / oracle;
  const double r_ls = ls.report.hv / oracle;
  // Front endpoints are the images of theta = +-u.
  const double far = -std::expm1(-4.0);
  const std::vector<std::vector<double>> ends{{0.0, far}, {far, 0.0}};
  std::size_t near = 0;
  const auto& f = ls.report.front;
  for (std::size_t i = 0; i < f.rows(); ++i) {
    double d = 1e300;
    for (const auto& e : ends) d = std::min(d, std::sqrt(phnhvi::numerics::squared_distance(f.row(i), e)));
    near += d <= 0.05 ? 1 : 0;
  }
  const double frac = static_cast<double>(near) / static_cast<double>(f.rows());
  return {r_hvi >= 0.95 && r_hvi > r_ls && frac >= 0.80,
          fmt("hv_ratio PHN-HVI %.5f, PHN-LS %.5f; LS near an endpoint %zu/%zu (%.1f%%)", r_hvi, r_ls,
              near, f.rows(), 100 * frac)};
}

Outcome problem4_three_objectives(Context& ctx) {
  const std::vector<double> ref{2, 2, 2};
  const auto [mc, se] = monte_carlo(ref, 1'000'000, 606, [](const std::vector<double>& z) {
    return z[0] * z[0] + z[1] * z[1] + z[2] * z[2] >= 1.0;
  });
  const double exact = 8.0 - std::numbers::pi / 6.0;
  const bool oracle_ok = std::abs(mc - exact) <= 3 * se;
  auto cfg = toy_config("p4", "phn-hvi", 8, 1.0, 42, ctx.work / "c6_p4");
  cfg.eval_rays = 231;
  const auto res = cli::run_train(cfg);
  const double ratio = res.report.hv / mc;
  return {oracle_ok && ratio >= 0.90 && res.report.ray_count() == 231,
          fmt("hv %.5f on %zu rays, MC oracle %.5f +- %.5f (closed form %.5f), hv_ratio %.5f >= 0.90",
              res.report.hv, res.report.ray_count(), mc, se, exact, ratio)};
}

Outcome partition_ablation(Context& ctx) {
  double with = 0.0;
  double without = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto a = toy_config("p2", "phn-hvi", 4, 1.0, seed, ctx.work / fmt("c7_partition_s%d", int(seed)));
    auto b = a;
    b.partition = false;
    b.out = (ctx.work / fmt("c7_dirichlet_s%d", int(seed))).string();
    const double ha = cli::run_train(a).report.hv;
    const double hb = cli::run_train(b).report.hv;
    with += ha / 5;
    without += hb / 5;
    per_seed += fmt(" s%d %.5f/%.5f", int(seed), ha, hb);
  }
  return {with >= without, fmt("mean HV partition %.6f vs Dirichlet %.6f;%s", with, without, per_seed.c_str())};
}

Outcome lambda_ablation(Context& ctx) {
  problems::Problem2 p;
  const double oracle = evalkit::oracle_hv(p, {2, 2});
  auto run = [&](double lambda) {
    return cli::run_train(toy_config("p2", "phn-hvi", 4, lambda, 42, ctx.work / fmt("c8_lambda_%g", lambda))).report;
  };
  const auto small = run(0.1);
  const auto mid = run(5.0);
  const auto large = run(100.0);
  const double r_small = small.hv / oracle;
  const double r_mid = mid.hv / oracle;
  return {large.mean_cosine() > small.mean_cosine() && r_small <= r_mid,
          fmt("mean cosine lambda=100 %.5f > lambda=0.1 %.5f; hv_ratio lambda=0.1 %.5f <= lambda=5 %.5f",
              large.mean_cosine(), small.mean_cosine(), r_small, r_mid)};
}

Outcome stein_sanity() {
  problems::Problem1 p;
  Rng init(909);
  solver::TrainState state(phnhvi::network::init_hypernet(p.target_spec(), 2, init), 1e-4);
  // Squash the output layer so both rays start near theta = 0.5, inside the
  // Pareto set, with losses almost equal.
  auto& hp = state.hypernet.params;
  const auto w = hp.entry("layer2.weight");
  const auto b = hp.entry("layer2.bias");
  auto vals = hp.mutable_values();
  for (std::size_t k = 0; k < w.size(); ++k) vals[w.offset + k] *= 0.01;
  vals[b.offset] = 0.5;
  solver::TrainConfig cfg;
  cfg.solver = solver::SolverKind::kStein;
  cfg.rays = 2;
  cfg.lambda = 0.0;
  cfg.alpha = {0.5, 0.5};
  cfg.ref_point = {2, 2};
  const std::vector<phnhvi::preference::PreferenceVector> rays{{0.5, 0.5}, {0.52, 0.48}};
  auto dist = [&] {
    std::vector<std::vector<double>> l;
    for (const auto& r : rays) l.push_back(p.eval(phnhvi::network::predict_theta(state.hypernet, r)).losses);
    return std::sqrt(phnhvi::numerics::squared_distance(l[0], l[1]));
  };
  const double before = dist();
  Rng rng(910);
  solver::stein_step(state, p, cfg, rays, rng);
  const double after = dist();

  Rng grng(911);
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 4);
    Matrix g(n, 10);
    for (double& v : g.data()) v = grng.normal() + 0.5;
    const auto r = solver::min_norm_convex_hull(g);
    const auto grid = n <= 3 ? phnhvi::oracles::exhaustive_min_norm(g, 1000)
                             : phnhvi::oracles::refined_min_norm(g, 50, 1000);
    const double diff = std::abs(phnhvi::numerics::norm(r.vector) - grid.norm);
    worst = std::max(worst, diff);
    bad += diff > 1e-4 ? 1 : 0;
  }
  return {after > before && bad == 0,
          fmt("pairwise loss distance %.3e -> %.3e; min-norm vs grid worst |diff| %.2e over 50, %d above 1e-4",
              before, after, worst, bad)};
}

Outcome tabular_end_to_end(Context& ctx) {
  const auto dir = ctx.work / "c10_tabular";
  fs::create_directories(dir);
  problems::write_synthetic_regression_csv(dir / "data.csv", 2000, 8, 4, 7);
  json j = {{"problem", "tabular"}, {"rays", 8}, {"lambda", 0.001}, {"iterations", 2000},
            {"log_every", 100}, {"tabular", {{"data", (dir / "data.csv").string()}}}};
  auto cfg = cli::config_from_json(j.dump());
  cfg.out = (dir / "run").string();
  const auto res = cli::run_train(cfg);
  const auto ev = cli::run_eval(dir / "run" / "checkpoint.json", 0, {}, dir / "eval");

  std::string problems_found;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) problems_found += " " + what;
  };
  for (const auto& path : {dir / "run" / "report.json", dir / "eval" / "report.json"}) {
    try {
      const auto doc = json::parse(slurp(path));
      require(doc.at("schema_version") == evalkit::kReportSchemaVersion, "report schema_version");
      for (const char* k : {"problem", "ray_count", "ref", "hv", "oracle_hv", "hv_ratio", "mean_cosine",
                            "rays", "front", "nondominated", "cosine"}) {
        require(doc.contains(k), std::string("missing ") + k);
      }
      require(doc.at("front").size() == doc.at("ray_count").get<std::size_t>(), "front rows");
      require(doc.at("front").at(0).size() == 4, "front width");
      evalkit::report_from_json(doc.dump());
    } catch (const std::exception& e) {
      require(false, path.filename().string() + ": " + e.what());
    }
  }
  std::ifstream metrics(dir / "run" / "metrics.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(metrics, line)) {
    ++lines;
    try {
      require(json::parse(line).at("schema_version") == cli::kMetricsSchemaVersion, "metrics schema_version");
    } catch (const std::exception& e) {
      require(false, std::string("metrics: ") + e.what());
    }
  }
  require(lines > 0, "empty metrics");
  const bool finite = std::isfinite(res.report.hv) && std::isfinite(ev.hv);
  require(finite, "non-finite HV");
  require(ev.hv == res.report.hv, "eval differs from training report");
  return {problems_found.empty(),
          fmt("4 tasks, p=8, lambda=0.001: test HV %.6f (eval %.6f), %zu metric lines, %zu iterations%s%s",
              res.report.hv, ev.hv, lines, res.iterations_run, problems_found.empty() ? "" : "; issues:",
              problems_found.c_str())};
}

Outcome determinism(Context& ctx) {
  if (ctx.p1_run.empty()) return {false, "criterion 4 run missing"};
  auto cfg = cli::config_from_json(ctx.p1_config);
  const auto again = ctx.work / "c11_repeat";
  cfg.out = again.string();
  cli::run_train(cfg);
  const auto a = slurp(ctx.p1_run / "metrics.jsonl");
  const auto b = slurp(again / "metrics.jsonl");
  return {!a.empty() && a == b, fmt("metrics.jsonl %zu vs %zu bytes, identical: %s", a.size(), b.size(),
                                    a == b ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phnhvi acceptance checks"};
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "scratch directory for run artifacts");
  app.add_option("--only", only, "run just these criteria");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.work = workdir;
  fs::remove_all(ctx.work);
  fs::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"hv oracle equivalence", hv_oracle_equivalence},
      {"hv gradient correctness", hv_gradient_correctness},
      {"lattice count", lattice_count},
      {"problem 1 convergence", [&] { return problem1_convergence(ctx); }},
      {"problem 2 concave-front separation", [&] { return problem2_separation(ctx); }},
      {"problem 4 three objectives", [&] { return problem4_three_objectives(ctx); }},
      {"partition ablation", [&] { return partition_ablation(ctx); }},
      {"lambda ablation", [&] { return lambda_ablation(ctx); }},
      {"stein sanity", stein_sanity},
      {"tabular end-to-end", [&] { return tabular_end_to_end(ctx); }},
      {"determinism", [&] { return determinism(ctx); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << "): " << out.detail << fmt(" [%.1fs]", secs) << std::endl;
    failures += out.pass ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
