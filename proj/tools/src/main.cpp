#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hddrul_cli/pipeline.hpp"
#include "hddrul_cli/run_config.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> seed, timesteps, lookback, cap, model_filter, threads, out, snapshots;
  bool synthetic = false;
  std::vector<std::string> overrides;
  std::string model, history;
};

hddrul::cli::RunConfig effective_config(const Flags& f) {
  using hddrul::cli::set_value;
  auto config = f.config.empty() ? hddrul::cli::RunConfig{} : hddrul::cli::load_config(f.config);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw hddrul::ConfigError("--set expects key=value, got " + kv);
    set_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.snapshots) set_value(config, "snapshot_dir", *f.snapshots);
  if (f.synthetic) config.synthetic = true;
  if (f.seed) set_value(config, "seed", *f.seed);
  if (f.timesteps) set_value(config, "timesteps", *f.timesteps);
  if (f.lookback) {
    set_value(config, "lookback_train", *f.lookback);
    set_value(config, "lookback_test", *f.lookback);
  }
  if (f.cap) set_value(config, "cap", *f.cap);
  if (f.model_filter) set_value(config, "model_filter", *f.model_filter);
  if (f.threads) set_value(config, "threads", *f.threads);
  if (f.out) set_value(config, "out", *f.out);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-drive remaining-useful-life pipeline"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "Run configuration file (key = value)");
  app.add_option("--seed", f.seed, "Root seed");
  app.add_option("--timesteps", f.timesteps, "Comma-separated window lengths");
  app.add_option("--lookback", f.lookback, "Days before failure for training and test cohorts");
  app.add_option("--cap", f.cap, "RUL label cap in days");
  app.add_option("--model-filter", f.model_filter, "Drive model to select failures for");
  app.add_option("--threads", f.threads, "Worker threads");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--snapshots", f.snapshots, "Directory of daily snapshot CSV files");
  app.add_flag("--synthetic", f.synthetic, "Use the synthetic generator instead of snapshots");
  app.add_option("--set", f.overrides, "Override any configuration key (key=value)");

  auto* ingest = app.add_subcommand("ingest", "Build train/test cohorts");
  auto* synth = app.add_subcommand("synth", "Write synthetic daily snapshot files");
  auto* features = app.add_subcommand("features", "Score attributes and pick the predictors");
  auto* train = app.add_subcommand("train", "Train the LSTM variants and the forest");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate every model on both test cohorts");
  auto* predict = app.add_subcommand("predict", "Per-day RUL estimates for a drive history");
  predict->add_option("--model", f.model, "Model or forest file")->required();
  predict->add_option("--history", f.history, "Cohort-format drive history CSV")->required();
  auto* report = app.add_subcommand("report", "Render the evaluation summaries as markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hddrul::cli::config_error;
  }

  return hddrul::cli::guarded(
      [&]() -> int {
        namespace cli = hddrul::cli;
        if (predict->parsed()) return cli::cmd_predict(f.model, f.history, std::cout, std::cerr);
        const auto config = effective_config(f);
        if (ingest->parsed()) return cli::cmd_ingest(config, std::cerr);
        if (synth->parsed()) return cli::cmd_synth(config, std::cerr);
        if (features->parsed()) return cli::cmd_features(config, std::cerr);
        if (train->parsed()) return cli::cmd_train(config, std::cerr);
        if (evaluate->parsed()) return cli::cmd_evaluate(config, std::cerr);
        if (report->parsed()) return cli::cmd_report(config, std::cout, std::cerr);
        return cli::config_error;
      },
      std::cerr);
}
