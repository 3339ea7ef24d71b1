#pragma once

// Reference implementations written independently of the library code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline double sse(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  double mean = 0.0;
  for (auto i : idx) mean += y[i];
  mean /= static_cast<double>(idx.size());
  double s = 0.0;
  for (auto i : idx) s += (y[i] - mean) * (y[i] - mean);
  return s;
}

inline double mean_of(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
  double m = 0.0;
  for (auto i : idx) m += y[i];
  return m / static_cast<double>(idx.size());
}

// Exhaustive recursive best-split regression tree. Every (feature,
// midpoint) pair is tried; the smallest child SSE wins, ties going to the
// lower feature and then the lower threshold.
struct BruteTree {
  const Rows& x;
  const std::vector<double>& y;
  std::vector<double> importance;
  // leaf value for each training row
  std::vector<double> fitted;

  BruteTree(const Rows& rows, const std::vector<double>& targets)
      : x(rows), y(targets), importance(rows.empty() ? 0 : rows[0].size(), 0.0), fitted(rows.size()) {
    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all);
  }

  void grow(const std::vector<std::size_t>& idx) {
    const double parent = sse(y, idx);
    bool pure = true;
    for (auto i : idx) pure = pure && y[i] == y[idx[0]];
    struct Best {
      double score;
      std::size_t feature;
      double threshold;
    };
    std::optional<Best> best;
    if (!pure && idx.size() >= 2) {
      const double tol = 1e-10 * std::max(1.0, parent);
      for (std::size_t f = 0; f < x[0].size(); ++f) {
        std::vector<double> values;
        for (auto i : idx) values.push_back(x[i][f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
          double t = values[k] + (values[k + 1] - values[k]) / 2.0;
          if (t >= values[k + 1]) t = values[k];
          std::vector<std::size_t> l, r;
          for (auto i : idx) (x[i][f] <= t ? l : r).push_back(i);
          const double score = sse(y, l) + sse(y, r);
          if (!best || score < best->score - tol) best = Best{score, f, t};
        }
      }
    }
    if (!best) {
      const double v = mean_of(y, idx);
      for (auto i : idx) fitted[i] = v;
      leaves.push_back({idx, v});
      return;
    }
    std::vector<std::size_t> l, r;
    for (auto i : idx) (x[i][best->feature] <= best->threshold ? l : r).push_back(i);
    importance[best->feature] += std::max(0.0, parent - sse(y, l) - sse(y, r));
    splits.push_back({best->feature, best->threshold});
    grow(l);
    grow(r);
  }

  std::vector<double> normalized_importance() const {
    const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
    std::vector<double> out(importance.size(), 0.0);
    if (total > 0)
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = importance[k] / total;
    return out;
  }

  struct Leaf {
    std::vector<std::size_t> rows;
    double value;
  };
  struct Split {
    std::size_t feature;
    double threshold;
  };
  std::vector<Leaf> leaves;
  std::vector<Split> splits;
};

// Direct product-moment formula in long double.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Mean absolute error with the absolute errors summed in ascending order
// using Kahan compensation.
inline double kahan_mae(const std::vector<double>& p, const std::vector<double>& a) {
  std::vector<double> e;
  for (std::size_t i = 0; i < p.size(); ++i) e.push_back(std::fabs(p[i] - a[i]));
  std::sort(e.begin(), e.end());
  double sum = 0.0, c = 0.0;
  for (double v : e) {
    const double yk = v - c;
    const double t = sum + yk;
    c = (t - sum) - yk;
    sum = t;
  }
  return sum / static_cast<double>(e.size());
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// One-unit LSTM with scalar weights; x is a scalar feature.
struct ScalarLstm {
  double wi, wf, wg, wo;  // input weights
  double ui, uf, ug, uo;  // recurrent weights
  double bi, bf, bg, bo;

  // Runs the sequence from zero state and returns the final h.
  double run(const std::vector<double>& xs) const {
    double h = 0.0, c = 0.0;
    for (double x : xs) {
      const double i = sigmoid(wi * x + ui * h + bi);
      const double f = sigmoid(wf * x + uf * h + bf);
      const double g = std::tanh(wg * x + ug * h + bg);
      const double o = sigmoid(wo * x + uo * h + bo);
      c = f * c + i * g;
      h = o * std::tanh(c);
    }
    return h;
  }
};

}  // namespace oracle
