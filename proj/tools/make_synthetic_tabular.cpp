// Writes the synthetic multi-task regression table used as the tabular stand-in.
#include <iostream>

#include <CLI11.hpp>

#include "phnhvi/error.hpp"
#include "phnhvi/problems.hpp"
#include "phnhvi/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic multi-output regression CSV"};
  std::string out;
  std::size_t rows = 2000;
  std::size_t features = 8;
  std::size_t tasks = 4;
  std::uint64_t seed = 7;
  app.add_option("-o,--out", out, "Output CSV path")->required();
  app.add_option("--rows", rows, "Number of rows");
  app.add_option("--features", features, "Number of input columns");
  app.add_option("--tasks", tasks, "Number of target columns");
  app.add_option("--seed", seed, "Generator seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : phnhvi::cli::kExitConfig;
  }
  try {
    phnhvi::problems::write_synthetic_regression_csv(out, rows, features, tasks, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return phnhvi::cli::exit_code_for(e);
  }
  return 0;
}
