#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <thread>

#include "hddrul/error.hpp"
#include "hddrul/forest.hpp"
#include "hddrul/rng.hpp"
#include "hddrul/text.hpp"

namespace hddrul {

RandomForest::RandomForest(std::vector<int> attributes, std::vector<RegressionTree> trees,
                           std::uint64_t seed)
    : attributes_(std::move(attributes)), trees_(std::move(trees)), seed_(seed) {}

double RandomForest::predict(std::span<const double> row) const {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict(row);
  return sum / static_cast<double>(trees_.size());
}

std::vector<double> RandomForest::predict(const RowMatrix& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out[static_cast<std::size_t>(i)] =
        predict(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
  return out;
}

RandomForest fit_forest(const RowMatrix& x, std::span<const double> y, std::vector<int> attributes,
                        const ForestOptions& options) {
  if (x.rows() == 0) throw DataError("fit_forest needs at least one row");
  if (options.n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (static_cast<std::size_t>(x.cols()) != attributes.size())
    throw ConfigError("fit_forest: column count does not match attribute list");

  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<RegressionTree> trees(options.n_estimators);
  auto grow = [&](std::size_t first, std::size_t stride) {
    for (std::size_t t = first; t < trees.size(); t += stride) {
      std::vector<std::size_t> rows(n);
      if (options.bootstrap) {
        Rng rng(derive_seed(options.seed, "tree-" + std::to_string(t)));
        for (auto& r : rows) r = rng.below(n);
      } else {
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
      }
      trees[t] = fit_tree(x, y, rows, options.tree);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, trees.size()));
  if (threads == 1) {
    grow(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(grow, t, threads);
  }
  return RandomForest(std::move(attributes), std::move(trees), options.seed);
}

Importances forest_importances(const RandomForest& forest) {
  Importances result{std::vector<double>(forest.attributes().size(), 0.0), false};
  for (const auto& tree : forest.trees()) {
    auto own = tree.importances();
    for (std::size_t j = 0; j < own.values.size(); ++j) result.values[j] += own.values[j];
  }
  double total = 0.0;
  for (double v : result.values) total += v;
  if (total <= 0.0) {
    result.degenerate = true;
    return result;
  }
  for (double& v : result.values) v /= total;
  return result;
}

void save_forest(std::ostream& out, const RandomForest& forest) {
  out << "hddrul-forest 1\n";
  out << "attributes " << forest.attributes().size();
  for (int id : forest.attributes()) out << ' ' << id;
  out << "\nseed " << forest.seed() << "\ntrees " << forest.trees().size() << '\n';
  for (const auto& tree : forest.trees()) {
    out << "tree " << tree.nodes().size() << '\n';
    for (const auto& node : tree.nodes()) {
      out << node.feature << ' ' << format_double(node.threshold) << ' ' << node.left << ' '
          << node.right << ' ' << format_double(node.value) << ' ' << node.samples << ' '
          << format_double(node.impurity_decrease) << '\n';
    }
  }
  out << "end\n";
}

namespace {

void expect_token(std::istream& in, const std::string& token) {
  std::string got;
  if (!(in >> got) || got != token) throw DataError("forest file: expected '" + token + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  std::string text;
  if (!(in >> text)) throw DataError(std::string("forest file: missing ") + what);
  if constexpr (std::is_floating_point_v<T>) {
    auto v = parse_double(text);
    if (!v) throw DataError(std::string("forest file: bad ") + what);
    return *v;
  } else {
    auto v = parse_int(text);
    if (!v) throw DataError(std::string("forest file: bad ") + what);
    return static_cast<T>(*v);
  }
}

}  // namespace

RandomForest load_forest(std::istream& in) {
  expect_token(in, "hddrul-forest");
  if (read_value<int>(in, "version") != 1) throw DataError("forest file: unsupported version");
  expect_token(in, "attributes");
  const auto n_attr = read_value<std::size_t>(in, "attribute count");
  std::vector<int> attributes(n_attr);
  for (auto& id : attributes) id = read_value<int>(in, "attribute id");
  expect_token(in, "seed");
  std::string seed_text;
  in >> seed_text;
  std::uint64_t seed = 0;
  auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
  if (seed_text.empty() || ec != std::errc{} || ptr != seed_text.data() + seed_text.size())
    throw DataError("forest file: bad seed");
  expect_token(in, "trees");
  const auto n_trees = read_value<std::size_t>(in, "tree count");
  std::vector<RegressionTree> trees;
  trees.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    expect_token(in, "tree");
    const auto n_nodes = read_value<std::size_t>(in, "node count");
    if (n_nodes == 0) throw DataError("forest file: empty tree");
    std::vector<TreeNode> nodes(n_nodes);
    for (auto& node : nodes) {
      node.feature = read_value<int>(in, "feature");
      node.threshold = read_value<double>(in, "threshold");
      node.left = read_value<int>(in, "left");
      node.right = read_value<int>(in, "right");
      node.value = read_value<double>(in, "value");
      node.samples = read_value<std::size_t>(in, "samples");
      node.impurity_decrease = read_value<double>(in, "impurity decrease");
      const bool bad_child = !node.is_leaf() && (node.left <= 0 || node.right <= 0 ||
                                                 static_cast<std::size_t>(node.left) >= n_nodes ||
                                                 static_cast<std::size_t>(node.right) >= n_nodes);
      if (node.feature >= static_cast<int>(n_attr) || bad_child)
        throw DataError("forest file: inconsistent node");
    }
    trees.emplace_back(n_attr, std::move(nodes));
  }
  expect_token(in, "end");
  return RandomForest(std::move(attributes), std::move(trees), seed);
}

}  // namespace hddrul
