#include "phnhvi/evalkit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "phnhvi/error.hpp"
#include "phnhvi/hypervolume.hpp"
#include "phnhvi/solver.hpp"

namespace phnhvi::evalkit {

using nlohmann::json;

Matrix EvalReport::nondominated_front() const {
  std::size_t n = 0;
  for (bool b : nondominated) n += b ? 1 : 0;
  Matrix out(n, front.cols());
  std::size_t k = 0;
  for (std::size_t i = 0; i < front.rows(); ++i) {
    if (!nondominated[i]) continue;
    std::copy(front.row(i).begin(), front.row(i).end(), out.row(k++).begin());
  }
  return out;
}

double EvalReport::mean_cosine() const {
  if (cosine.empty()) return 0.0;
  double s = 0.0;
  for (double c : cosine) s += c;
  return s / static_cast<double>(cosine.size());
}

EvalReport report_from_losses(std::string problem, std::vector<PreferenceVector> rays,
                              Matrix losses, std::vector<double> ref,
                              std::optional<double> oracle) {
  if (rays.size() != losses.rows()) throw DimensionError("one loss vector per ray expected");
  auto set = hypervolume::FrontSet::make(losses, ref);
  EvalReport r;
  r.problem = std::move(problem);
  r.cosine.reserve(rays.size());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const double nl = numerics::norm(losses.row(i));
    r.cosine.push_back(nl > 1e-12 ? solver::cosine_similarity(rays[i], losses.row(i)) : 0.0);
  }
  r.rays = std::move(rays);
  r.front = std::move(losses);
  r.nondominated = std::move(set.nondominated);
  r.ref = std::move(ref);
  r.hv = set.hv;
  if (oracle) {
    r.oracle_hv = oracle;
    r.hv_ratio = *oracle > 0.0 ? r.hv / *oracle : 0.0;
  }
  return r;
}

EvalReport evaluate(const network::HypernetParams& hn, const problems::Problem& problem,
                    const std::vector<PreferenceVector>& rays, std::vector<double> ref,
                    std::optional<double> oracle) {
  const std::size_t nobj = problem.objectives();
  if (ref.empty()) ref = problem.reference_point();
  if (ref.size() != nobj) throw DimensionError("reference point has the wrong length");
  const auto batch = problem.evaluation_batch();
  const auto* tabular = dynamic_cast<const problems::TabularProblem*>(&problem);
  Matrix losses(rays.size(), nobj);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (rays[i].size() != nobj) {
      throw DimensionError("ray " + std::to_string(i) + " has " + std::to_string(rays[i].size()) +
                           " entries, problem has " + std::to_string(nobj) + " objectives");
    }
    const auto theta = network::predict_theta(hn, rays[i]);
    const auto l = tabular ? tabular->losses(theta, *batch)
                           : problem.eval(theta, batch ? &*batch : nullptr).losses;
    if (!numerics::all_finite(l)) {
      throw NumericError("non-finite evaluation loss on ray " + std::to_string(i),
                         static_cast<std::ptrdiff_t>(i));
    }
    std::copy(l.begin(), l.end(), losses.row(i).begin());
  }
  return report_from_losses(problem.name(), rays, std::move(losses), std::move(ref), oracle);
}

double oracle_hv(const problems::Problem& problem, const std::vector<double>& ref,
                 std::size_t resolution) {
  if (!problem.has_oracle_front()) {
    throw InvalidArgument("problem '" + problem.name() + "' has no oracle front");
  }
  if (ref.size() != problem.objectives()) throw DimensionError("reference point has the wrong length");
  if (problem.name() == "p4") {
    bool outside_sphere = true;
    for (double r : ref) outside_sphere = outside_sphere && r >= 1.0;
    if (outside_sphere) {
      // The front is the unit-sphere octant; everything in [0, ref] outside
      // the unit ball is dominated.
      double box = 1.0;
      for (double r : ref) box *= r;
      return box - std::numbers::pi / 6.0;
    }
  }
  std::size_t res = resolution ? resolution : problems::default_front_resolution(problem);
  double prev = problems::oracle_front(problem, res, ref).hv;
  for (int round = 0; round < 4; ++round) {
    res *= 2;
    const double cur = problems::oracle_front(problem, res, ref).hv;
    if (std::abs(cur - prev) < kOracleTolerance) return cur;
    prev = cur;
  }
  throw NumericError("oracle HV did not settle under resolution doubling");
}

std::string report_to_json(const EvalReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["problem"] = r.problem;
  j["ray_count"] = r.ray_count();
  j["ref"] = r.ref;
  j["hv"] = r.hv;
  j["oracle_hv"] = r.oracle_hv ? json(*r.oracle_hv) : json(nullptr);
  j["hv_ratio"] = r.hv_ratio ? json(*r.hv_ratio) : json(nullptr);
  j["mean_cosine"] = r.mean_cosine();
  j["rays"] = r.rays;
  json front = json::array();
  for (std::size_t i = 0; i < r.front.rows(); ++i) {
    front.push_back(std::vector<double>(r.front.row(i).begin(), r.front.row(i).end()));
  }
  j["front"] = std::move(front);
  j["nondominated"] = r.nondominated;
  j["cosine"] = r.cosine;
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw IoError("unsupported report schema_version");
    }
    EvalReport r;
    r.problem = j.at("problem").get<std::string>();
    r.ref = j.at("ref").get<std::vector<double>>();
    r.hv = j.at("hv").get<double>();
    if (!j.at("oracle_hv").is_null()) r.oracle_hv = j.at("oracle_hv").get<double>();
    if (!j.at("hv_ratio").is_null()) r.hv_ratio = j.at("hv_ratio").get<double>();
    r.rays = j.at("rays").get<std::vector<PreferenceVector>>();
    const auto front = j.at("front").get<std::vector<std::vector<double>>>();
    r.front = Matrix(front.size(), front.empty() ? 0 : front.front().size());
    for (std::size_t i = 0; i < front.size(); ++i) {
      if (front[i].size() != r.front.cols()) throw IoError("ragged front in report");
      std::copy(front[i].begin(), front[i].end(), r.front.row(i).begin());
    }
    r.nondominated = j.at("nondominated").get<std::vector<bool>>();
    r.cosine = j.at("cosine").get<std::vector<double>>();
    if (r.nondominated.size() != r.front.rows() || r.rays.size() != r.front.rows()) {
      throw IoError("report arrays disagree in length");
    }
    return r;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
}

namespace {

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

void write_front_csv(const std::filesystem::path& path, const EvalReport& r) {
  const std::size_t nobj = r.front.cols();
  std::string out = "ray_index";
  for (std::size_t j = 1; j <= nobj; ++j) out += ",r_" + std::to_string(j);
  for (std::size_t j = 1; j <= nobj; ++j) out += ",L_" + std::to_string(j);
  out += ",nondominated\n";
  for (std::size_t i = 0; i < r.front.rows(); ++i) {
    out += std::to_string(i);
    for (double v : r.rays[i]) {
      out += ',';
      put(out, v);
    }
    for (double v : r.front.row(i)) {
      out += ',';
      put(out, v);
    }
    out += r.nondominated[i] ? ",1\n" : ",0\n";
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << out;
  if (!f) throw IoError("write failed for " + path.string());
}

Matrix read_points_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      // Accept headerless files: a first line that parses as numbers is data.
      const char* b = line.data();
      double probe = 0.0;
      auto [p, ec] = std::from_chars(b, b + line.size(), probe);
      if (ec != std::errc() || (p != b + line.size() && *p != ',')) continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      const char* b = line.data() + start;
      const char* e = line.data() + end;
      while (b < e && *b == ' ') ++b;
      double v = 0.0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e) {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell");
      }
      row.push_back(v);
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return m;
}

}  // namespace phnhvi::evalkit
