#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "margin_paths/norms.hpp"
#include "margin_paths/predictor.hpp"

namespace mpaths::harness {

/// Experiment names accepted by the CLI, in a fixed order.
const std::vector<std::string>& experiment_names();

/// Statement ids an experiment reports on.
std::vector<std::string> statements_for(const std::string& experiment);

struct DatasetConfig {
  std::string generator = "symmetric_pair";
  std::size_t d = 2;
  std::size_t n = 2;
  std::uint64_t seed = 0;
  /// Inline samples replace the generator when present.
  std::optional<Eigen::MatrixXd> x;
  std::vector<int> y;
};

struct GridConfig {
  double rho_min = 1.0;
  double rho_ratio = 2.0;
  std::size_t rho_count = 12;
  std::optional<double> rho_max;
  std::vector<double> c_grid = {10.0, 100.0, 1000.0, 10000.0};
  std::vector<double> gammas = {1.0, 10.0, 100.0, 1000.0};
  std::size_t steps = 100000;
  double eta = 0.1;

  std::vector<double> rho_grid() const;
};

struct SolverConfig {
  int restarts = 16;
  int max_iter = 4000;
  double pgtol = 1e-12;
  double grid_res = 1e-3;
};

/// Every field has a default; the experiment picks its own dataset, predictor
/// and norm when they are left unset.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::optional<NormTag> norm;
  std::optional<DatasetConfig> dataset;
  std::optional<std::vector<Family>> predictor;
  std::vector<std::optional<Rational>> declared_degrees;
  GridConfig grids;
  SolverConfig solver;
  std::string output_dir = "margin_paths_out";
};

/// Parses a JSON config. Syntax errors carry "line L, column C"; semantic errors
/// carry the JSON pointer of the offending field. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON form without the output directory (the provenance hash input).
std::string config_to_json(const ExperimentConfig& cfg);

/// Family from its display form, e.g. "ProductLinear(2)" or "PowerLogWrap(1)".
Family parse_family(const std::string& text);

/// Deterministic datasets. Kinds: separable_gaussian, symmetric_pair,
/// lexicographic_demo, deep_separable_ensemble, all_positive, plus the fixtures
/// powerlog_demo, svm_asym and svm_symmetric.
Dataset generate_dataset(const std::string& kind, std::size_t d, std::size_t n, std::uint64_t seed);

Dataset make_dataset(const DatasetConfig& cfg);

struct Check {
  std::string statement;
  std::string name;
  bool pass = false;
  bool gating = true;
  std::string detail;
};

struct RunResult {
  int exit_code = 0;
  std::vector<Check> checks;
  std::string output_dir;
};

/// Runs the experiment and writes results.csv, summary.json and summary.txt
/// into cfg.output_dir (each written to a temporary file, then renamed).
/// exit_code is 1 iff a gating check fails.
RunResult run(const ExperimentConfig& cfg);

/// Command-line entry point: 0 all checks pass, 1 a gating check fails,
/// 2 usage or configuration error.
int cli_main(int argc, char** argv);

}  // namespace mpaths::harness
