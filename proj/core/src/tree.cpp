#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hddrul/error.hpp"
#include "hddrul/forest.hpp"

namespace hddrul {
namespace {

double mean_of(std::span<const double> y, std::span<const std::size_t> rows) {
  double sum = 0.0;
  for (auto r : rows) sum += y[r];
  return sum / static_cast<double>(rows.size());
}

double sse_of(std::span<const double> y, std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  const double mean = mean_of(y, rows);
  double sse = 0.0;
  for (auto r : rows) sse += (y[r] - mean) * (y[r] - mean);
  return sse;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

double midpoint(double lo, double hi) {
  double mid = lo / 2.0 + hi / 2.0;
  // Adjacent doubles can round the midpoint up onto `hi`.
  if (!(mid < hi)) mid = lo;
  return mid;
}

Split best_split(const RowMatrix& x, std::span<const double> y, std::vector<std::size_t>& rows,
                 double node_sse) {
  const std::size_t n = rows.size();
  double total = 0.0;
  for (auto r : rows) total += y[r];
  const double tol = 1e-10 * std::max(1.0, node_sse);

  Split best;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, j) < x(b, j); });
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += y[rows[i]];
      const double lo = x(rows[i], j), hi = x(rows[i + 1], j);
      if (!(lo < hi)) continue;
      const double nl = static_cast<double>(i + 1), nr = static_cast<double>(n - i - 1);
      const double right_sum = total - left_sum;
      // SSE(node) - SSE(left) - SSE(right) expressed through sums.
      const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr -
                          total * total / static_cast<double>(n);
      if (gain > best.gain + tol) {
        best.feature = static_cast<int>(j);
        best.threshold = midpoint(lo, hi);
        best.gain = gain;
      }
    }
  }
  return best;
}

}  // namespace

RegressionTree::RegressionTree(std::size_t feature_count, std::vector<TreeNode> nodes)
    : feature_count_(feature_count), nodes_(std::move(nodes)) {}

double RegressionTree::predict(std::span<const double> row) const {
  std::size_t k = 0;
  while (!nodes_[k].is_leaf()) {
    const auto& node = nodes_[k];
    k = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes_[k].value;
}

Importances RegressionTree::importances() const {
  Importances result{std::vector<double>(feature_count_, 0.0), false};
  double total = 0.0;
  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    result.values[static_cast<std::size_t>(node.feature)] += node.impurity_decrease;
    total += node.impurity_decrease;
  }
  if (total <= 0.0) {
    std::fill(result.values.begin(), result.values.end(), 0.0);
    result.degenerate = true;
    return result;
  }
  for (double& v : result.values) v /= total;
  return result;
}

RegressionTree fit_tree(const RowMatrix& x, std::span<const double> y,
                        std::span<const std::size_t> rows, const TreeOptions& options) {
  if (rows.empty()) throw DataError("fit_tree needs at least one row");
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw ConfigError("fit_tree: feature rows and targets differ in length");

  std::vector<TreeNode> nodes(1);
  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  stack.push_back({0, {rows.begin(), rows.end()}});

  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();
    auto& members = item.rows;
    {
      TreeNode& node = nodes[item.node];
      node.samples = members.size();
      node.value = mean_of(y, members);
    }
    const bool pure = std::all_of(members.begin(), members.end(),
                                  [&](std::size_t r) { return y[r] == y[members.front()]; });
    if (pure || members.size() < options.min_samples_split) continue;

    const double node_sse = sse_of(y, members);
    Split split = best_split(x, y, members, node_sse);
    if (split.feature < 0) continue;

    std::vector<std::size_t> left, right;
    for (auto r : members) {
      (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    const int left_index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    TreeNode& node = nodes[item.node];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_index;
    node.right = left_index + 1;
    node.impurity_decrease = std::max(0.0, node_sse - sse_of(y, left) - sse_of(y, right));
    stack.push_back({static_cast<std::size_t>(left_index + 1), std::move(right)});
    stack.push_back({static_cast<std::size_t>(left_index), std::move(left)});
  }
  return RegressionTree(static_cast<std::size_t>(x.cols()), std::move(nodes));
}

RegressionTree fit_tree(const RowMatrix& x, std::span<const double> y,
                        const TreeOptions& options) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(x, y, rows, options);
}

}  // namespace hddrul
