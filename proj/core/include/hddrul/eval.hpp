#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hddrul/preprocess.hpp"

namespace hddrul {

// Fraction of samples whose prediction, rounded half away from zero,
// equals the actual value.
double accuracy_rounded(std::span<const double> predictions, std::span<const double> actuals);

double mae(std::span<const double> predictions, std::span<const double> actuals);

// 1 - SS_res / SS_tot. nullopt when the actuals are constant.
std::optional<double> r2(std::span<const double> predictions, std::span<const double> actuals);

struct Prediction {
  double actual = 0.0;
  double predicted = 0.0;
};

struct EvalReport {
  std::string model_id;
  // nullopt for models without a lookback (printed "NA").
  std::optional<std::size_t> timesteps;
  std::string cohort_id;
  double accuracy = 0.0;
  std::optional<double> r2;
  double mae = 0.0;
  // Sorted by actual RUL (stable, so ties keep dataset order).
  std::vector<Prediction> samples;
};

// Something that maps a windowed dataset to one prediction per sample.
struct Predictor {
  std::string model_id;
  std::optional<std::size_t> reported_timesteps;
  // Shape of the windows it consumes.
  std::size_t window_timesteps = 1;
  std::size_t features = 0;
  std::function<std::vector<double>(const WindowedDataset&)> predict;
};

// Throws ConfigError when the dataset shape does not match the predictor.
EvalReport evaluate(const Predictor& predictor, const WindowedDataset& cohort,
                    std::string cohort_id);

struct MatrixEntry {
  // Label written to the summary table, e.g. "LSTM", "Bi-LSTM", "RF".
  std::string label;
  std::optional<std::size_t> timesteps;
  // nullopt when the model could not be loaded.
  std::optional<Predictor> predictor;
};

struct MatrixCohort {
  std::string id;
  // Builds the dataset a given predictor should be evaluated on.
  std::function<WindowedDataset(const Predictor&)> dataset;
};

struct MatrixResult {
  // Grouped by cohort, entries in the order given.
  std::vector<EvalReport> reports;
  std::vector<std::string> warnings;
};

// Evaluates every available entry on every cohort. Missing entries are
// skipped with a warning.
MatrixResult run_matrix(std::span<const MatrixEntry> entries, std::span<const MatrixCohort> cohorts);

// Metrics header block followed by actual,predicted rows.
void write_report_csv(std::ostream& out, const EvalReport& report);
EvalReport read_report_csv(std::istream& in);

// Model,Timesteps,Accuracy,R2,MAE rows for one cohort.
void write_summary_csv(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace hddrul
