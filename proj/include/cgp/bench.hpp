#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgp/linalg.hpp"

namespace cgp {

/// Settings shared by every experiment. The JSON config file uses these
/// field names verbatim; unset optionals fall back to per-experiment defaults.
/// Knot subdivisions per axis for the 2-D benchmark when grid_n is unset.
inline constexpr int kDefaultGrid2d = 20;

struct ExperimentConfig {
  /// Test function id; empty runs the experiment's default set.
  std::string function;
  /// CSV dataset for `fit` and `cv`.
  std::string dataset;
  /// Constraint text (see parse_constraint); empty uses the function's shape.
  std::string constraint;
  std::string kernel = "se";
  double variance = 1.0;
  /// Lengthscales in original units; empty uses the function defaults.
  std::vector<double> theta;
  /// Select lengthscales by cross-validation instead.
  bool cv = false;
  std::optional<int> grid_n;
  std::optional<int> n;
  std::optional<double> noise;
  int replications = 200;
  /// Sampler draws per replication (coverage) or per fit.
  int samples = 1000;
  std::uint64_t seed = 1;
  std::string out = "results";
  bool center = true;
  double level = 0.95;
  /// Sample sizes for the sweep.
  std::vector<int> sizes;
  /// Probe locations for the coverage table.
  std::vector<double> points;
  /// Holdout fraction for `fit`, or an index file (one 0-based row per line).
  double holdout = 0.2;
  std::string holdout_index;
  /// Box domain for datasets; empty uses the data bounding box.
  std::vector<double> lower;
  std::vector<double> upper;
  /// 0 uses every hardware thread.
  unsigned threads = 0;

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string to_json(const ExperimentConfig& config);

struct ResultRow {
  std::string function;
  std::string estimator;
  std::string metric;
  double value = 0.0;
  double stderr_value = 0.0;
  long replications = 0;
  std::uint64_t seed = 0;
};

struct ResultTable {
  std::string name;
  std::vector<ResultRow> rows;
  double wall_seconds = 0.0;
  /// JSON object with run details for the log (never written to the CSV).
  std::string log_json = "{}";
  /// Extra files (name, contents) written next to the CSV.
  std::vector<std::pair<std::string, std::string>> artifacts;

  /// First row matching (function, estimator, metric); throws ArgumentError.
  const ResultRow& find(const std::string& function, const std::string& estimator,
                        const std::string& metric) const;
};

/// RMSE (x100) of the MAP estimate over equispaced probes, centered and not,
/// next to the unconstrained mean.
ResultTable run_rmse_benchmark(const ExperimentConfig& config);
/// Empirical coverage (%) of pointwise credible bands on the sinusoidal setup.
ResultTable run_coverage_benchmark(const ExperimentConfig& config);
/// MSE (x100) of the isotonic MAP surface on a 32 x 32 grid.
ResultTable run_mse2d_benchmark(const ExperimentConfig& config);
/// RMSE of the MAP for logistic2 over a range of sample sizes.
ResultTable run_sample_size_sweep(const ExperimentConfig& config);
/// Fits a CSV dataset, reports holdout Q^2 and writes fit.json.
ResultTable fit_csv(const ExperimentConfig& config);
/// Cross-validated lengthscales on a dataset or a simulated test-function sample.
ResultTable run_cv(const ExperimentConfig& config);

/// Dispatches on a CLI subcommand name.
ResultTable run_experiment(const std::string& subcommand, const ExperimentConfig& config);

/// CSV with columns function,estimator,metric,value,stderr,replications,seed.
std::string to_csv(const ResultTable& table);
/// Writes <out>/<name>.csv and appends one JSON line to <out>/run.jsonl.
void write_outputs(const ResultTable& table, const ExperimentConfig& config);

/// 1 - sum (f - fhat)^2 / sum (f - mean f)^2.
double q_squared(const Vector& truth, const Vector& predicted);

struct Dataset {
  Matrix inputs;
  Vector values;
};
/// Header x1,...,xd,y; throws ParseError with the 1-based line number.
Dataset read_dataset_csv(const std::string& path);
Dataset parse_dataset_csv(const std::string& text);

}  // namespace cgp
