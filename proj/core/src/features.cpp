#include "hddrul/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hddrul/error.hpp"
#include "hddrul/text.hpp"

namespace hddrul {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("pearson needs two sequences of equal length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<CorrelationScore> correlation_scores(std::span<const LabeledSeries> cohort,
                                                 std::span<const int> attributes) {
  std::vector<CorrelationScore> scores;
  for (int id : attributes) {
    CorrelationScore entry{id, std::nullopt, 0};
    double sum = 0.0;
    for (const auto& series : cohort) {
      std::vector<double> values, labels;
      for (std::size_t i = 0; i < series.days.size(); ++i) {
        auto it = series.days[i].smart.find(id);
        if (it == series.days[i].smart.end() || !it->second) continue;
        values.push_back(*it->second);
        labels.push_back(static_cast<double>(series.rul.at(i)));
      }
      if (values.size() < 2) continue;
      if (auto r = pearson(values, labels)) {
        sum += *r;
        ++entry.drives;
      }
    }
    if (entry.drives > 0) entry.score = std::abs(sum / static_cast<double>(entry.drives));
    scores.push_back(entry);
  }
  return scores;
}

Importances tree_importances(const RowMatrix& rows, std::span<const double> targets) {
  if (rows.rows() < 2) throw ConfigError("tree_importances needs at least 2 rows");
  return fit_tree(rows, targets).importances();
}

FeatureScoreTable score_features(std::span<const LabeledSeries> cohort,
                                 std::span<const int> attributes) {
  FeatureScoreTable table;
  const auto correlations = correlation_scores(cohort, attributes);

  auto filled = fill_missing({cohort.begin(), cohort.end()}, attributes);
  std::size_t n_rows = 0;
  for (const auto& s : filled.series) n_rows += s.days.size();
  std::vector<double> importance(attributes.size(), 0.0);
  if (n_rows >= 2) {
    RowMatrix x(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(attributes.size()));
    std::vector<double> y;
    y.reserve(n_rows);
    Eigen::Index r = 0;
    for (const auto& s : filled.series) {
      for (std::size_t i = 0; i < s.days.size(); ++i, ++r) {
        for (std::size_t j = 0; j < attributes.size(); ++j)
          x(r, static_cast<Eigen::Index>(j)) = *s.days[i].smart.at(attributes[j]);
        y.push_back(static_cast<double>(s.rul.at(i)));
      }
    }
    auto imp = tree_importances(x, y);
    importance = imp.values;
    table.degenerate_target = imp.degenerate;
  } else {
    table.degenerate_target = true;
  }

  for (std::size_t j = 0; j < attributes.size(); ++j)
    table.rows.push_back({attributes[j], correlations[j].score, importance[j]});
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    if (a.correlation.has_value() != b.correlation.has_value()) return a.correlation.has_value();
    if (a.correlation && *a.correlation != *b.correlation) return *a.correlation > *b.correlation;
    return a.attribute < b.attribute;
  });
  return table;
}

std::vector<int> select_features(const FeatureScoreTable& /*table*/,
                                 const std::optional<std::vector<int>>& override_ids,
                                 std::span<const int> available) {
  const std::vector<int>& chosen = override_ids ? *override_ids : default_features();
  if (chosen.empty()) throw ConfigError("feature list is empty");
  for (int id : chosen) {
    if (std::find(available.begin(), available.end(), id) == available.end())
      throw ConfigError("feature smart_" + std::to_string(id) + " is not present in the cohort");
  }
  return chosen;
}

void write_score_table(std::ostream& out, const FeatureScoreTable& table) {
  out << "attribute,correlation_score,tree_importance\n";
  for (const auto& row : table.rows) {
    out << row.attribute << ',';
    if (row.correlation) out << format_double(*row.correlation);
    out << ',' << format_double(row.importance) << '\n';
  }
}

}  // namespace hddrul
