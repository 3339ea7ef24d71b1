#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <hddrul/dataset.hpp>
#include <hddrul/neural.hpp>

#include "hddrul_cli/run_config.hpp"

namespace hddrul::cli {

enum ExitCode : int { ok = 0, config_error = 1, data_error = 2, divergence = 3 };

// Cohort ids. "test" and "extrapolate" hold the same held-out drives at the
// test and extrapolation lookbacks.
inline constexpr std::string_view kTrain = "train";
inline constexpr std::string_view kTest = "test";
inline constexpr std::string_view kExtrapolate = "extrapolate";

// Where every artifact lives under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path cohort(std::string_view id) const;
  std::filesystem::path manifest() const { return root / "ingest_manifest.csv"; }
  std::filesystem::path snapshots() const { return root / "snapshots"; }
  std::filesystem::path scores() const { return root / "features" / "scores.csv"; }
  std::filesystem::path selected() const { return root / "features" / "selected.txt"; }
  std::filesystem::path model(Architecture arch, std::size_t timesteps) const;
  std::filesystem::path forest() const { return root / "models" / "rf.forest"; }
  std::filesystem::path trace(Architecture arch, std::size_t timesteps) const;
  std::filesystem::path report(std::string_view cohort, std::string_view name) const;
  std::filesystem::path summary(std::string_view cohort) const;
  std::filesystem::path report_md() const { return root / "report.md"; }
  std::filesystem::path run_config() const { return root / "run_config.txt"; }
};

// "lstm-15", "bilstm-5", ...
std::string model_name(Architecture arch, std::size_t timesteps);
// Summary-table label: "LSTM" or "Bi-LSTM".
std::string model_label(Architecture arch);

// Keeps the last lookback+1 labeled days (rul <= lookback).
LabeledSeries last_days(const LabeledSeries& series, int lookback);

// Writes train/test/extrapolate cohort CSVs and the ingest manifest, from
// snapshot files or from the synthetic generator.
int cmd_ingest(const RunConfig& config, std::ostream& log);
// Writes Backblaze-format daily snapshot files under <out>/snapshots.
int cmd_synth(const RunConfig& config, std::ostream& log);
int cmd_features(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
// Nonzero when a model file is missing; the available ones are still
// evaluated and written.
int cmd_evaluate(const RunConfig& config, std::ostream& log);
// serial,date,predicted_rul for every day of every drive in the history.
int cmd_predict(const std::filesystem::path& model, const std::filesystem::path& history,
                std::ostream& out, std::ostream& log);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& log);

// Runs `body` and maps the library's exception types to exit codes,
// printing the message to `log`.
int guarded(const std::function<int()>& body, std::ostream& log);

}  // namespace hddrul::cli
