#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hddrul::cli {

constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::optional<std::filesystem::path> snapshot_dir;
  bool synthetic = false;
  std::filesystem::path out = "hddrul-out";
  std::string model_filter = "ST4000DM000";

  int lookback_train = 60;
  int lookback_test = 60;
  int lookback_extrapolate = 120;
  int cap = 30;
  // Drive-level share of the scanned failures used for training.
  double train_fraction = 0.5;

  std::optional<std::vector<int>> features;
  std::vector<std::size_t> timesteps{5, 10, 15, 30};

  std::size_t hidden_size = 32;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;
  std::optional<double> clip_predictions;

  std::size_t rf_estimators = 1000;
  // "all" or "selected"
  std::string rf_features = "all";
  double rf_train_fraction = 0.8;

  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t synth_train_drives = 30;
  std::size_t synth_test_drives = 20;
  std::size_t synth_features = 5;
  int synth_jump_day = 15;
  double synth_noise = 0.3;
};

// Sets one key from its text form. Throws ConfigError for unknown keys and
// unparseable values.
void set_value(RunConfig& config, std::string_view key, std::string_view value);

// Flat "key = value" lines, '#' comments. schema_version must be present
// and equal to kSchemaVersion.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

// Range checks. With need_snapshots, a non-synthetic config must name an
// existing snapshot directory.
void validate(const RunConfig& config, bool need_snapshots = false);

// Every key, in a stable order; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

}  // namespace hddrul::cli
