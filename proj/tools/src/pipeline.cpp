#include "hddrul_cli/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <hddrul/eval.hpp>
#include <hddrul/features.hpp>
#include <hddrul/forest.hpp>
#include <hddrul/preprocess.hpp>
#include <hddrul/rng.hpp>
#include <hddrul/text.hpp>

namespace hddrul::cli {

namespace fs = std::filesystem;

fs::path Layout::cohort(std::string_view id) const {
  return root / "cohorts" / (std::string(id) + ".csv");
}
fs::path Layout::model(Architecture arch, std::size_t timesteps) const {
  return root / "models" / (model_name(arch, timesteps) + ".model");
}
fs::path Layout::trace(Architecture arch, std::size_t timesteps) const {
  return root / "traces" / (model_name(arch, timesteps) + ".csv");
}
fs::path Layout::report(std::string_view cohort, std::string_view name) const {
  return root / "reports" / std::string(cohort) / (std::string(name) + ".csv");
}
fs::path Layout::summary(std::string_view cohort) const {
  return root / ("summary_" + std::string(cohort) + ".csv");
}

std::string model_name(Architecture arch, std::size_t timesteps) {
  return std::string(architecture_name(arch)) + "-" + std::to_string(timesteps);
}

std::string model_label(Architecture arch) {
  return arch == Architecture::vanilla ? "LSTM" : "Bi-LSTM";
}

LabeledSeries last_days(const LabeledSeries& series, int lookback) {
  LabeledSeries out{series.serial, {}, {}};
  for (std::size_t i = 0; i < series.days.size(); ++i) {
    if (series.rul.at(i) > lookback) continue;
    out.days.push_back(series.days[i]);
    out.rul.push_back(series.rul[i]);
  }
  return out;
}

namespace {

constexpr Architecture kArchitectures[] = {Architecture::vanilla, Architecture::bidirectional};

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  fn(out);
  out.flush();
  if (!out) throw DataError("failed while writing " + path.string());
}

std::ifstream open_input(const fs::path& path, std::string_view hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string() + " (" + std::string(hint) + ")");
  return in;
}

std::vector<LabeledSeries> read_cohort(const Layout& layout, std::string_view id) {
  auto in = open_input(layout.cohort(id), "run ingest first");
  return read_cohort_csv(in);
}

void record_config(const RunConfig& config) {
  write_file(Layout{config.out}.run_config(), [&](std::ostream& out) { out << to_text(config); });
}

// Fill gaps in `features`, cap the labels, and report dropped drives.
std::vector<LabeledSeries> prepare(std::vector<LabeledSeries> cohort, std::span<const int> features,
                                   int cap, std::string_view id, std::ostream& log) {
  auto filled = fill_missing(std::move(cohort), features);
  for (const auto& serial : filled.excluded)
    log << "warning: " << id << ": drive " << serial
        << " dropped, a selected feature is missing on every day\n";
  return cap_rul(std::move(filled.series), cap);
}

std::vector<StandardizedSeries> scale(std::span<const LabeledSeries> cohort,
                                      std::span<const int> features, bool per_device) {
  std::vector<StandardizedSeries> out;
  out.reserve(cohort.size());
  for (const auto& s : cohort)
    out.push_back(per_device ? standardize_per_device(s, features) : unscaled(s, features));
  return out;
}

std::vector<int> training_features(const RunConfig& config, std::span<const LabeledSeries> train) {
  const auto available = cohort_attributes(train);
  return select_features(FeatureScoreTable{}, config.features, available);
}

std::string join_ids(std::span<const int> ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i]);
  return s;
}

std::size_t record_count(std::span<const LabeledSeries> cohort) {
  std::size_t n = 0;
  for (const auto& s : cohort) n += s.days.size();
  return n;
}

void write_manifest(const Layout& layout,
                    const std::vector<std::pair<std::string_view, const std::vector<LabeledSeries>*>>& cohorts,
                    const std::vector<int>& lookbacks) {
  write_file(layout.manifest(), [&](std::ostream& out) {
    out << "cohort,drives,records,first_date,last_date,lookback_days\n";
    for (std::size_t k = 0; k < cohorts.size(); ++k) {
      const auto& [id, series] = cohorts[k];
      std::optional<Day> first, last;
      for (const auto& s : *series)
        for (const auto& d : s.days) {
          if (!first || d.date < *first) first = d.date;
          if (!last || d.date > *last) last = d.date;
        }
      out << id << ',' << series->size() << ',' << record_count(*series) << ','
          << (first ? format_date(*first) : "") << ',' << (last ? format_date(*last) : "") << ','
          << lookbacks[k] << '\n';
    }
  });
}

SynthConfig synth_config(const RunConfig& config, std::size_t drives, int lookback,
                         std::string_view label, std::string prefix) {
  SynthConfig s;
  s.n_drives = drives;
  s.lookback_days = lookback;
  s.n_features = config.synth_features;
  s.jump_day = config.synth_jump_day;
  s.noise_scale = config.synth_noise;
  s.seed = derive_seed(config.seed, label);
  s.serial_prefix = std::move(prefix);
  s.validate();
  return s;
}

int held_lookback(const RunConfig& config) {
  return std::max(config.lookback_test, config.lookback_extrapolate);
}

// Rows of the forest's design matrix: one per drive-day, unscaled.
WindowedDataset forest_rows(std::span<const LabeledSeries> prepared, std::span<const int> attributes) {
  auto rows = scale(prepared, attributes, false);
  return window(rows, 1);
}

WindowedDataset subset(const WindowedDataset& data, std::span<const std::size_t> samples) {
  WindowedDataset out;
  out.timesteps = data.timesteps;
  out.features = data.features;
  out.attributes = data.attributes;
  out.samples = samples.size();
  for (auto s : samples) {
    auto w = data.window(s);
    out.values.insert(out.values.end(), w.begin(), w.end());
    out.targets.push_back(data.targets[s]);
    out.provenance.push_back(data.provenance[s]);
  }
  return out;
}

RowMatrix as_rows(const WindowedDataset& data) {
  const auto width = static_cast<Eigen::Index>(data.timesteps * data.features);
  return Eigen::Map<const RowMatrix>(data.values.data(), static_cast<Eigen::Index>(data.samples),
                                     width);
}

Predictor forest_predictor(std::shared_ptr<const RandomForest> forest) {
  Predictor p;
  p.model_id = "rf";
  p.window_timesteps = 1;
  p.features = forest->attributes().size();
  p.predict = [forest](const WindowedDataset& data) { return forest->predict(as_rows(data)); };
  return p;
}

Predictor lstm_predictor(std::shared_ptr<const BiLstmModel> model, std::string id) {
  Predictor p;
  p.model_id = std::move(id);
  p.reported_timesteps = model->timesteps;
  p.window_timesteps = model->timesteps;
  p.features = model->features;
  p.predict = [model](const WindowedDataset& data) { return predict(*model, data); };
  return p;
}

std::string seconds_text(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  return buf;
}

}  // namespace

int cmd_ingest(const RunConfig& config, std::ostream& log) {
  validate(config, true);
  const Layout layout{config.out};
  std::vector<LabeledSeries> train, test, extrapolate;
  int status = ok;

  if (config.synthetic) {
    train = generate_synthetic(
        synth_config(config, config.synth_train_drives, config.lookback_train, "synth/train", "SYN-TRAIN"));
    const auto held = generate_synthetic(
        synth_config(config, config.synth_test_drives, held_lookback(config), "synth/test", "SYN-TEST"));
    for (const auto& s : held) {
      test.push_back(last_days(s, config.lookback_test));
      extrapolate.push_back(last_days(s, config.lookback_extrapolate));
    }
  } else {
    auto load = load_snapshot_dir(*config.snapshot_dir, config.threads);
    for (const auto& e : load.errors) log << "warning: skipped " << e << '\n';
    if (load.files_read == 0 && load.errors.empty())
      log << "warning: no snapshot files in " << config.snapshot_dir->string() << '\n';
    if (load.files_read == 0 && !load.errors.empty()) status = data_error;
    log << "read " << load.files_read << " snapshot files, " << load.records.size() << " records\n";

    const Corpus corpus(std::move(load.records));
    const auto events = scan_failures(corpus.records(), config.model_filter);
    if (events.empty()) log << "warning: no failures of model " << config.model_filter << '\n';

    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "ingest/split"));
    shuffle(std::span<std::size_t>(order), rng);
    auto n_train = static_cast<std::size_t>(
        std::llround(config.train_fraction * static_cast<double>(events.size())));
    if (events.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, events.size() - 1);
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> held_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(held_idx.begin(), held_idx.end());

    auto build = [&](std::size_t i, int lookback) -> std::optional<LabeledSeries> {
      try {
        return build_labeled_series(corpus, events[i], lookback);
      } catch (const DataError& e) {
        log << "warning: " << events[i].serial << ": " << e.what() << '\n';
        return std::nullopt;
      }
    };
    for (auto i : train_idx)
      if (auto s = build(i, config.lookback_train)) train.push_back(std::move(*s));
    for (auto i : held_idx) {
      auto s = build(i, held_lookback(config));
      if (!s) continue;
      test.push_back(last_days(*s, config.lookback_test));
      extrapolate.push_back(last_days(*s, config.lookback_extrapolate));
    }
  }

  write_file(layout.cohort(kTrain), [&](std::ostream& out) { write_cohort_csv(out, train); });
  write_file(layout.cohort(kTest), [&](std::ostream& out) { write_cohort_csv(out, test); });
  write_file(layout.cohort(kExtrapolate), [&](std::ostream& out) { write_cohort_csv(out, extrapolate); });
  write_manifest(layout, {{kTrain, &train}, {kTest, &test}, {kExtrapolate, &extrapolate}},
                 {config.lookback_train, config.lookback_test, config.lookback_extrapolate});
  record_config(config);
  log << "cohorts: train " << train.size() << ", test " << test.size() << ", extrapolate "
      << extrapolate.size() << " drives\n";
  return status;
}

int cmd_synth(const RunConfig& config, std::ostream& log) {
  validate(config);
  const Layout layout{config.out};
  const int lookback = std::max(config.lookback_train, held_lookback(config));
  auto failing = generate_synthetic(synth_config(
      config, config.synth_train_drives + config.synth_test_drives, lookback, "synth/snapshots", "SYN"));
  // Failures of another model, which the model filter must drop.
  auto decoys = generate_synthetic(synth_config(config, 5, lookback, "synth/decoys", "DECOY"));

  auto records = to_drive_records(failing, config.model_filter);
  auto other = to_drive_records(decoys, "ST12000NM0007");
  records.insert(records.end(), other.begin(), other.end());
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.serial) < std::tie(b.date, b.serial);
  });
  const auto attributes = synthetic_attributes(config.synth_features);

  fs::create_directories(layout.snapshots());
  std::size_t files = 0;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    while (j < records.size() && records[j].date == records[i].date) ++j;
    write_file(layout.snapshots() / (format_date(records[i].date) + ".csv"), [&](std::ostream& out) {
      out << "date,serial_number,model,capacity_bytes,failure";
      for (int id : attributes) out << ",smart_" << id << "_normalized,smart_" << id << "_raw";
      out << '\n';
      for (std::size_t k = i; k < j; ++k) {
        const auto& r = records[k];
        out << format_date(r.date) << ',' << r.serial << ',' << r.model << ",4000787030016,"
            << (r.failed ? 1 : 0);
        for (int id : attributes) {
          out << ",100,";
          auto it = r.smart.find(id);
          if (it != r.smart.end() && it->second) out << format_double(*it->second);
        }
        out << '\n';
      }
    });
    ++files;
    i = j;
  }
  record_config(config);
  log << "wrote " << files << " daily snapshot files to " << layout.snapshots().string() << '\n';
  return ok;
}

int cmd_features(const RunConfig& config, std::ostream& log) {
  validate(config);
  const Layout layout{config.out};
  const auto cohort = cap_rul(read_cohort(layout, kTrain), config.cap);
  if (cohort.empty()) throw DataError("training cohort is empty");
  const auto attributes = cohort_attributes(cohort);
  const auto table = score_features(cohort, attributes);
  const auto selected = select_features(table, config.features, attributes);
  if (table.degenerate_target) log << "warning: labels are constant; importances are all zero\n";

  write_file(layout.scores(), [&](std::ostream& out) { write_score_table(out, table); });
  write_file(layout.selected(), [&](std::ostream& out) { out << join_ids(selected) << '\n'; });
  record_config(config);
  log << "scored " << table.rows.size() << " attributes; selected " << join_ids(selected) << '\n';
  return ok;
}

int cmd_train(const RunConfig& config, std::ostream& log) {
  validate(config);
  const Layout layout{config.out};
  const auto raw = read_cohort(layout, kTrain);
  if (raw.empty()) throw DataError("training cohort is empty");
  const auto features = training_features(config, raw);
  const auto prepared = prepare(raw, features, config.cap, kTrain, log);
  if (prepared.empty()) throw DataError("no training drives left after filling");
  const auto scaled = scale(prepared, features, true);
  log << "training on " << prepared.size() << " drives, features " << join_ids(features) << '\n';

  for (auto ts : config.timesteps) {
    const auto data = window(scaled, ts);
    for (auto arch : kArchitectures) {
      const auto name = model_name(arch, ts);
      TrainConfig tc;
      tc.architecture = arch;
      tc.hidden_size = config.hidden_size;
      tc.epochs = config.epochs;
      tc.batch_size = config.batch_size;
      tc.adam = {config.learning_rate, config.beta1, config.beta2, config.epsilon};
      tc.clip_norm = config.clip_norm;
      tc.seed = derive_seed(config.seed, "train/" + name);
      TrainResult result;
      try {
        result = train(tc, data);
      } catch (const DivergenceError& e) {
        write_file(layout.trace(arch, ts), [&](std::ostream& out) { write_trace_csv(out, e.trace()); });
        throw;
      }
      result.model.clip_predictions = config.clip_predictions;
      result.trace.snapshot_id = model_snapshot_id(result.model);
      write_file(layout.model(arch, ts), [&](std::ostream& out) { save_model(out, result.model); });
      write_file(layout.trace(arch, ts), [&](std::ostream& out) { write_trace_csv(out, result.trace); });
      const auto& losses = result.trace.epoch_loss;
      log << name << ": loss " << format_double(losses.empty() ? 0.0 : losses.back()) << " in "
          << seconds_text(std::accumulate(result.trace.epoch_seconds.begin(),
                                          result.trace.epoch_seconds.end(), 0.0))
          << ", snapshot " << result.trace.snapshot_id << '\n';
    }
  }

  const auto rf_attributes = config.rf_features == "all" ? attributes_present_on_all(raw) : features;
  if (rf_attributes.empty()) throw DataError("no attribute is present on every training drive");
  const auto rf_prepared = prepare(raw, rf_attributes, config.cap, kTrain, log);
  const auto rows = forest_rows(rf_prepared, rf_attributes);
  std::vector<std::size_t> order(rows.samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, "forest/split"));
  shuffle(std::span<std::size_t>(order), rng);
  const auto n_fit = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.rf_train_fraction * static_cast<double>(rows.samples))),
      1, rows.samples);
  std::vector<std::size_t> fit_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_fit));
  std::vector<std::size_t> hold_idx(order.begin() + static_cast<std::ptrdiff_t>(n_fit), order.end());
  std::sort(fit_idx.begin(), fit_idx.end());
  std::sort(hold_idx.begin(), hold_idx.end());

  const auto fit = subset(rows, fit_idx);
  ForestOptions options;
  options.n_estimators = config.rf_estimators;
  options.seed = derive_seed(config.seed, "forest");
  options.threads = config.threads;
  const auto started = std::chrono::steady_clock::now();
  auto forest = std::make_shared<const RandomForest>(
      fit_forest(as_rows(fit), fit.targets, rf_attributes, options));
  write_file(layout.forest(), [&](std::ostream& out) { save_forest(out, *forest); });
  log << "rf: " << config.rf_estimators << " trees on " << fit.samples << " rows, attributes "
      << join_ids(rf_attributes) << " in "
      << seconds_text(std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count())
      << '\n';

  if (!hold_idx.empty()) {
    auto report = evaluate(forest_predictor(forest), subset(rows, hold_idx), "train-holdout");
    report.model_id = "RF";
    write_file(layout.report("train-holdout", "rf"), [&](std::ostream& out) { write_report_csv(out, report); });
    log << "rf holdout: accuracy " << format_double(report.accuracy) << ", mae "
        << format_double(report.mae) << '\n';
  }
  record_config(config);
  return ok;
}

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  validate(config);
  const Layout layout{config.out};

  struct Spec {
    std::vector<int> attributes;
    bool per_device = true;
  };
  std::map<std::string, Spec> specs;
  std::vector<MatrixEntry> entries;
  std::vector<std::string> names;
  bool missing = false;

  std::optional<std::vector<int>> fallback;
  auto default_attributes = [&]() -> const std::vector<int>& {
    if (!fallback) fallback = training_features(config, read_cohort(layout, kTrain));
    return *fallback;
  };

  for (auto arch : kArchitectures) {
    for (auto ts : config.timesteps) {
      const auto name = model_name(arch, ts);
      MatrixEntry entry{model_label(arch), ts, std::nullopt};
      const auto path = layout.model(arch, ts);
      if (fs::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        auto model = std::make_shared<const BiLstmModel>(load_model(in));
        specs[name] = {model->attributes.empty() ? default_attributes() : model->attributes, true};
        entry.predictor = lstm_predictor(model, name);
        names.push_back(name);
      } else {
        log << "warning: missing model file " << path.string() << '\n';
        missing = true;
      }
      entries.push_back(std::move(entry));
    }
  }
  MatrixEntry rf_entry{"RF", std::nullopt, std::nullopt};
  if (fs::exists(layout.forest())) {
    std::ifstream in(layout.forest(), std::ios::binary);
    auto forest = std::make_shared<const RandomForest>(load_forest(in));
    specs["rf"] = {forest->attributes(), false};
    rf_entry.predictor = forest_predictor(forest);
    names.push_back("rf");
  } else {
    log << "warning: missing model file " << layout.forest().string() << '\n';
    missing = true;
  }
  entries.push_back(std::move(rf_entry));

  for (auto id : {kTest, kExtrapolate}) {
    const auto raw = read_cohort(layout, id);
    if (raw.empty()) throw DataError(std::string(id) + " cohort is empty");
    std::map<std::pair<std::vector<int>, bool>, std::vector<StandardizedSeries>> cache;
    MatrixCohort cohort{std::string(id), [&](const Predictor& p) {
                          const auto& spec = specs.at(p.model_id);
                          auto key = std::make_pair(spec.attributes, spec.per_device);
                          auto it = cache.find(key);
                          if (it == cache.end()) {
                            auto prepared = prepare(raw, spec.attributes, config.cap, id, log);
                            it = cache.emplace(key, scale(prepared, spec.attributes, spec.per_device)).first;
                          }
                          return window(it->second, p.window_timesteps);
                        }};
    auto result = run_matrix(entries, std::span<const MatrixCohort>(&cohort, 1));
    if (result.reports.size() != names.size()) throw DataError("evaluation produced an unexpected report count");
    for (std::size_t k = 0; k < names.size(); ++k)
      write_file(layout.report(id, names[k]),
                 [&](std::ostream& out) { write_report_csv(out, result.reports[k]); });
    write_file(layout.summary(id), [&](std::ostream& out) { write_summary_csv(out, result.reports); });
    log << id << ": " << result.reports.size() << " reports\n";
    write_summary_csv(log, result.reports);
  }
  record_config(config);
  return missing ? config_error : ok;
}

int cmd_predict(const fs::path& model_path, const fs::path& history_path, std::ostream& out,
                std::ostream& log) {
  auto model_in = open_input(model_path, "model file");
  std::string magic;
  model_in >> magic;
  model_in.seekg(0);
  auto history_in = open_input(history_path, "drive history");
  const auto history = read_cohort_csv(history_in);
  if (history.empty()) log << "warning: history has no rows\n";

  out << "serial,date,predicted_rul\n";
  if (magic == "hddrul-forest") {
    const auto forest = load_forest(model_in);
    for (const auto& series : history) {
      auto filled = fill_missing({series}, forest.attributes());
      if (filled.series.empty())
        throw DataError(series.serial + " lacks a feature the forest needs");
      const auto rows = unscaled(filled.series.front(), forest.attributes());
      for (Eigen::Index r = 0; r < rows.values.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(rows.values.cols()));
        for (Eigen::Index c = 0; c < rows.values.cols(); ++c) row[static_cast<std::size_t>(c)] = rows.values(r, c);
        out << series.serial << ',' << format_date(rows.dates[static_cast<std::size_t>(r)]) << ','
            << format_double(forest.predict(row)) << '\n';
      }
    }
    return ok;
  }

  const auto model = load_model(model_in);
  if (model.attributes.empty()) throw ConfigError("model file does not record its input attributes");
  for (const auto& series : history) {
    auto filled = fill_missing({series}, model.attributes);
    if (filled.series.empty()) throw DataError(series.serial + " lacks a feature the model needs");
    const StandardizedSeries scaled = standardize_per_device(filled.series.front(), model.attributes);
    const auto data = window(std::span<const StandardizedSeries>(&scaled, 1), model.timesteps);
    for (std::size_t s = 0; s < data.samples; ++s) {
      const RowMatrix w = Eigen::Map<const RowMatrix>(data.window(s).data(),
                                                      static_cast<Eigen::Index>(data.timesteps),
                                                      static_cast<Eigen::Index>(data.features));
      out << data.provenance[s].serial << ',' << format_date(data.provenance[s].date) << ','
          << format_double(bilstm_forward(model, w)) << '\n';
    }
  }
  return ok;
}

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& log) {
  validate(config);
  const Layout layout{config.out};
  std::ostringstream md;
  md << "# RUL evaluation\n";
  bool any = false;
  const std::pair<std::string_view, int> cohorts[] = {{kTest, config.lookback_test},
                                                       {kExtrapolate, config.lookback_extrapolate}};
  for (const auto& [id, lookback] : cohorts) {
    std::ifstream in(layout.summary(id), std::ios::binary);
    if (!in) {
      log << "warning: no summary for " << id << '\n';
      continue;
    }
    any = true;
    md << "\n## " << id << " (" << lookback << " days before failure)\n\n";
    std::string line;
    bool header = true;
    while (next_line(in, line)) {
      const auto fields = split_csv_line(line);
      md << '|';
      for (const auto& f : fields) md << ' ' << f << " |";
      md << '\n';
      if (header) {
        md << '|';
        for (std::size_t k = 0; k < fields.size(); ++k) md << " --- |";
        md << '\n';
        header = false;
      }
    }
  }
  if (!any) throw ConfigError("nothing to report; run evaluate first");
  if (std::ifstream scores(layout.scores(), std::ios::binary); scores) {
    md << "\n## feature scores\n\n| attribute | correlation | importance |\n| --- | --- | --- |\n";
    std::string line;
    next_line(scores, line);
    while (next_line(scores, line)) {
      const auto f = split_csv_line(line);
      if (f.size() == 3) md << "| " << f[0] << " | " << f[1] << " | " << f[2] << " |\n";
    }
  }
  write_file(layout.report_md(), [&](std::ostream& o) { o << md.str(); });
  out << md.str();
  return ok;
}

int guarded(const std::function<int()>& body, std::ostream& log) {
  try {
    return body();
  } catch (const NumericError& e) {
    log << "numeric error: " << e.what() << '\n';
    return divergence;
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << '\n';
    return config_error;
  } catch (const DataError& e) {
    log << "data error: " << e.what() << '\n';
    return data_error;
  } catch (const fs::filesystem_error& e) {
    log << "data error: " << e.what() << '\n';
    return data_error;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return data_error;
  }
}

}  // namespace hddrul::cli
