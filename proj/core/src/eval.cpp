#include "hddrul/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "hddrul/error.hpp"
#include "hddrul/text.hpp"

namespace hddrul {
namespace {

void require_pairs(std::span<const double> a, std::span<const double> b, std::size_t min_len,
                   const char* what) {
  if (a.size() != b.size() || a.size() < min_len)
    throw ConfigError(std::string(what) + ": inputs must have equal length >= " +
                      std::to_string(min_len));
}

}  // namespace

double accuracy_rounded(std::span<const double> predictions, std::span<const double> actuals) {
  require_pairs(predictions, actuals, 1, "accuracy_rounded");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (std::round(predictions[i]) == actuals[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double mae(std::span<const double> predictions, std::span<const double> actuals) {
  require_pairs(predictions, actuals, 1, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += std::abs(predictions[i] - actuals[i]);
  return sum / static_cast<double>(predictions.size());
}

std::optional<double> r2(std::span<const double> predictions, std::span<const double> actuals) {
  require_pairs(predictions, actuals, 2, "r2");
  double mean = 0.0;
  for (double a : actuals) mean += a;
  mean /= static_cast<double>(actuals.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    ss_res += (actuals[i] - predictions[i]) * (actuals[i] - predictions[i]);
    ss_tot += (actuals[i] - mean) * (actuals[i] - mean);
  }
  if (ss_tot == 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

EvalReport evaluate(const Predictor& predictor, const WindowedDataset& cohort,
                    std::string cohort_id) {
  if (cohort.samples > 0 &&
      (cohort.timesteps != predictor.window_timesteps || cohort.features != predictor.features))
    throw ConfigError(predictor.model_id + " expects " + std::to_string(predictor.window_timesteps) +
                      "x" + std::to_string(predictor.features) + " windows, cohort " + cohort_id +
                      " has " + std::to_string(cohort.timesteps) + "x" +
                      std::to_string(cohort.features));
  if (cohort.samples == 0) throw DataError("cohort " + cohort_id + " is empty");
  const auto predicted = predictor.predict(cohort);
  if (predicted.size() != cohort.samples)
    throw ConfigError(predictor.model_id + " returned the wrong number of predictions");

  EvalReport report;
  report.model_id = predictor.model_id;
  report.timesteps = predictor.reported_timesteps;
  report.cohort_id = std::move(cohort_id);
  report.accuracy = accuracy_rounded(predicted, cohort.targets);
  report.mae = mae(predicted, cohort.targets);
  report.r2 = cohort.samples >= 2 ? r2(predicted, cohort.targets) : std::nullopt;
  for (std::size_t i = 0; i < cohort.samples; ++i)
    report.samples.push_back({cohort.targets[i], predicted[i]});
  std::stable_sort(report.samples.begin(), report.samples.end(),
                   [](const Prediction& a, const Prediction& b) { return a.actual < b.actual; });
  return report;
}

MatrixResult run_matrix(std::span<const MatrixEntry> entries,
                        std::span<const MatrixCohort> cohorts) {
  MatrixResult result;
  for (const auto& entry : entries) {
    if (!entry.predictor) {
      result.warnings.push_back("skipping " + entry.label + " " +
                                (entry.timesteps ? std::to_string(*entry.timesteps) : "NA") +
                                ": model unavailable");
    }
  }
  for (const auto& cohort : cohorts) {
    for (const auto& entry : entries) {
      if (!entry.predictor) continue;
      auto report = evaluate(*entry.predictor, cohort.dataset(*entry.predictor), cohort.id);
      report.model_id = entry.label;
      report.timesteps = entry.timesteps;
      result.reports.push_back(std::move(report));
    }
  }
  return result;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "# model," << report.model_id << '\n';
  out << "# timesteps," << (report.timesteps ? std::to_string(*report.timesteps) : "NA") << '\n';
  out << "# cohort," << report.cohort_id << '\n';
  out << "# samples," << report.samples.size() << '\n';
  out << "# accuracy," << format_double(report.accuracy) << '\n';
  out << "# r2," << (report.r2 ? format_double(*report.r2) : "NA") << '\n';
  out << "# mae," << format_double(report.mae) << '\n';
  out << "actual,predicted\n";
  for (const auto& s : report.samples)
    out << format_double(s.actual) << ',' << format_double(s.predicted) << '\n';
}

EvalReport read_report_csv(std::istream& in) {
  EvalReport report;
  std::string line;
  std::size_t declared = 0;
  while (next_line(in, line)) {
    if (line.starts_with("# ")) {
      auto f = split_csv_line(std::string_view(line).substr(2));
      if (f.size() != 2) throw ParseError(0, "bad report header line '" + line + "'");
      const auto& key = f[0];
      const auto& value = f[1];
      if (key == "model") {
        report.model_id = value;
      } else if (key == "timesteps") {
        if (value != "NA") {
          auto v = parse_int(value);
          if (!v || *v < 0) throw ParseError(0, "bad timesteps");
          report.timesteps = static_cast<std::size_t>(*v);
        }
      } else if (key == "cohort") {
        report.cohort_id = value;
      } else if (key == "samples") {
        auto v = parse_int(value);
        if (!v || *v < 0) throw ParseError(0, "bad sample count");
        declared = static_cast<std::size_t>(*v);
      } else if (key == "accuracy" || key == "mae" || key == "r2") {
        if (key == "r2" && value == "NA") continue;
        auto v = parse_double(value);
        if (!v) throw ParseError(0, "bad metric " + key);
        if (key == "accuracy")
          report.accuracy = *v;
        else if (key == "mae")
          report.mae = *v;
        else
          report.r2 = *v;
      }
      continue;
    }
    if (line == "actual,predicted") continue;
    auto f = split_csv_line(line);
    auto a = f.size() == 2 ? parse_double(f[0]) : std::nullopt;
    auto p = f.size() == 2 ? parse_double(f[1]) : std::nullopt;
    if (!a || !p) throw ParseError(report.samples.size(), "bad prediction row");
    report.samples.push_back({*a, *p});
  }
  if (report.samples.size() != declared)
    throw DataError("report declares " + std::to_string(declared) + " samples but holds " +
                    std::to_string(report.samples.size()));
  return report;
}

void write_summary_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "Model,Timesteps,Accuracy,R2,MAE\n";
  char buf[128];
  for (const auto& r : reports) {
    std::string r2_text = "NA";
    if (r.r2) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.r2);
      r2_text = buf;
    }
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy);
    std::string acc = buf;
    std::snprintf(buf, sizeof buf, "%.6f", r.mae);
    out << r.model_id << ',' << (r.timesteps ? std::to_string(*r.timesteps) : "NA") << ',' << acc
        << ',' << r2_text << ',' << buf << '\n';
  }
}

}  // namespace hddrul
