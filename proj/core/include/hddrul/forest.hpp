#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hddrul {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TreeNode {
  // -1 marks a leaf.
  int feature = -1;
  // Rows with x[feature] <= threshold go left.
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // Mean target of the rows reaching this node.
  double value = 0.0;
  std::size_t samples = 0;
  // Weighted impurity decrease of this split: SSE(node) - SSE(left) - SSE(right).
  double impurity_decrease = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Importances {
  std::vector<double> values;
  // True when no split reduced impurity (e.g. constant target); values are
  // then all zero.
  bool degenerate = false;
};

// CART regression tree, node 0 is the root.
class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::size_t feature_count, std::vector<TreeNode> nodes);

  double predict(std::span<const double> row) const;
  std::size_t feature_count() const { return feature_count_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  // Impurity-decrease importances normalized to sum 1.
  Importances importances() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::size_t feature_count_ = 0;
  std::vector<TreeNode> nodes_;
};

struct TreeOptions {
  std::size_t min_samples_split = 2;
};

// Grows until nodes are pure or cannot be split (no depth cap). Splits
// maximize weighted variance reduction over midpoints between consecutive
// distinct values; ties go to the lowest column, then the lowest threshold.
// `rows` indexes into x/y and may repeat (bootstrap).
RegressionTree fit_tree(const RowMatrix& x, std::span<const double> y,
                        std::span<const std::size_t> rows, const TreeOptions& options = {});
RegressionTree fit_tree(const RowMatrix& x, std::span<const double> y,
                        const TreeOptions& options = {});

struct ForestOptions {
  std::size_t n_estimators = 1000;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  std::size_t threads = 1;
  TreeOptions tree;
};

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(std::vector<int> attributes, std::vector<RegressionTree> trees, std::uint64_t seed);

  // Arithmetic mean of the tree predictions.
  double predict(std::span<const double> row) const;
  std::vector<double> predict(const RowMatrix& x) const;

  const std::vector<int>& attributes() const { return attributes_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::uint64_t seed() const { return seed_; }

  bool operator==(const RandomForest&) const = default;

 private:
  std::vector<int> attributes_;
  std::vector<RegressionTree> trees_;
  std::uint64_t seed_ = 0;
};

// Each tree sees a size-n bootstrap resample drawn from its own stream
// derive_seed(seed, "tree-<i>"). Columns of x correspond to `attributes`.
RandomForest fit_forest(const RowMatrix& x, std::span<const double> y, std::vector<int> attributes,
                        const ForestOptions& options);

// Mean of per-tree normalized importances, renormalized to sum 1.
Importances forest_importances(const RandomForest& forest);

void save_forest(std::ostream& out, const RandomForest& forest);
// Throws DataError on a malformed file.
RandomForest load_forest(std::istream& in);

}  // namespace hddrul
