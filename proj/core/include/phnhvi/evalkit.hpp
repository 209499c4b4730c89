#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phnhvi/linalg.hpp"
#include "phnhvi/network.hpp"
#include "phnhvi/preference.hpp"
#include "phnhvi/problems.hpp"

namespace phnhvi::evalkit {

using numerics::Matrix;
using preference::PreferenceVector;

inline constexpr int kReportSchemaVersion = 1;

struct EvalReport {
  std::string problem;
  std::vector<PreferenceVector> rays;
  Matrix front;                    // one loss vector per ray, dominated rows kept
  std::vector<bool> nondominated;  // per row of `front`
  std::vector<double> ref;
  double hv = 0.0;
  std::optional<double> oracle_hv;
  std::optional<double> hv_ratio;
  std::vector<double> cosine;      // cos(r, L) per ray

  std::size_t ray_count() const { return rays.size(); }
  Matrix nondominated_front() const;
  double mean_cosine() const;
};

/// Eval-mode theta per ray, losses on the evaluation batch (test split for
/// tabular problems), HV against `ref` (the problem's canonical point when
/// empty). oracle_hv, when given, also fills hv_ratio.
EvalReport evaluate(const network::HypernetParams& hn, const problems::Problem& problem,
                    const std::vector<PreferenceVector>& rays, std::vector<double> ref = {},
                    std::optional<double> oracle = std::nullopt);

/// Builds a report from ready-made loss vectors (e.g. an oracle front).
EvalReport report_from_losses(std::string problem, std::vector<PreferenceVector> rays,
                              Matrix losses, std::vector<double> ref,
                              std::optional<double> oracle = std::nullopt);

/// True-front HV of a toy problem. Starts at `resolution` (problem default
/// when 0) and doubles until two consecutive values differ by < 1e-4.
/// Problem 4 with ref >= 1 uses the exact volume prod(ref) - pi/6.
/// Throws InvalidArgument for problems without an oracle front and
/// NumericError if the doubling check does not settle.
double oracle_hv(const problems::Problem& problem, const std::vector<double>& ref,
                 std::size_t resolution = 0);

inline constexpr double kOracleTolerance = 1e-4;

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Header `ray_index,r_1..r_J,L_1..L_J,nondominated`.
void write_front_csv(const std::filesystem::path& path, const EvalReport& report);
/// Headered numeric CSV of points, one per row. An empty file or a header
/// with no rows yields a 0 x 0 matrix.
Matrix read_points_csv(const std::filesystem::path& path);

}  // namespace phnhvi::evalkit
