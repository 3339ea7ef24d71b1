#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hddrul/dataset.hpp"
#include "hddrul/forest.hpp"

namespace hddrul {

// Product-moment correlation. nullopt when either input has zero variance.
// Throws ConfigError unless both inputs have the same length >= 2.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationScore {
  int attribute = 0;
  // |mean over drives of per-drive pearson(attribute, rul)|. nullopt when the
  // correlation is undefined on every drive.
  std::optional<double> score;
  // Drives that contributed to the mean.
  std::size_t drives = 0;
};

// Per-drive correlation on days where the attribute is present; drives with
// an undefined correlation are left out of that attribute's mean. The
// signed mean is taken before the absolute value.
std::vector<CorrelationScore> correlation_scores(std::span<const LabeledSeries> cohort,
                                                 std::span<const int> attributes);

// Impurity-decrease importances of a single unlimited-depth regression tree
// fit on the pooled rows, normalized to sum 1.
Importances tree_importances(const RowMatrix& rows, std::span<const double> targets);

struct FeatureScore {
  int attribute = 0;
  std::optional<double> correlation;
  double importance = 0.0;
};

struct FeatureScoreTable {
  // Sorted by correlation score, descending; undefined scores last; ties
  // by attribute id.
  std::vector<FeatureScore> rows;
  bool degenerate_target = false;
};

// Scores every attribute in `attributes` on the cohort. The selection tree
// uses one row per drive-day over the forward-filled attributes; drives
// lacking an attribute entirely are left out of the tree fit.
FeatureScoreTable score_features(std::span<const LabeledSeries> cohort,
                                 std::span<const int> attributes);

inline const std::vector<int>& default_features() {
  static const std::vector<int> ids = {7, 9, 240, 241, 242};
  return ids;
}

// Returns the override when given, otherwise the default predictor set.
// Throws ConfigError when an override id is not in `available`.
std::vector<int> select_features(const FeatureScoreTable& table,
                                 const std::optional<std::vector<int>>& override_ids,
                                 std::span<const int> available);

// attribute,correlation_score,tree_importance
void write_score_table(std::ostream& out, const FeatureScoreTable& table);

}  // namespace hddrul
