#include "vqa/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vqa/error.hpp"
#include "vqa/parallel.hpp"

namespace vqa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureRows& x, std::span<const double> y, const ForestOptions& opt, int mtry, std::uint64_t seed)
      : x_(x), y_(y), opt_(opt), mtry_(mtry), rng_(seed) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    RegressionTree tree;
    grow(tree, rows, 0);
    return tree;
  }

 private:
  double mean_of(const std::vector<std::size_t>& rows) const {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = y_[rows[i]];
    return stable_mean(v);
  }

  Split best_split(const std::vector<std::size_t>& rows) {
    const std::size_t d = x_.front().size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    // Partial Fisher-Yates: first mtry entries become the candidate set.
    for (int k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), d - 1);
      std::swap(features[static_cast<std::size_t>(k)], features[pick(rng_)]);
    }

    const std::size_t n = rows.size();
    const std::size_t min_leaf = static_cast<std::size_t>(opt_.min_leaf);
    double total = 0.0;
    for (std::size_t r : rows) total += y_[r];
    const double parent = total * total / static_cast<double>(n);

    Split best;
    std::vector<std::pair<double, double>> sorted(n);
    for (int k = 0; k < mtry_; ++k) {
      const std::size_t f = features[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < n; ++i) sorted[i] = {x_[rows[i]][f], y_[rows[i]]};
      std::sort(sorted.begin(), sorted.end());
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += sorted[i].second;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (sorted[i].first == sorted[i + 1].first) continue;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - parent;
        if (gain > best.gain + 1e-12 * std::abs(parent)) {
          const double lo = sorted[i].first;
          const double hi = sorted[i + 1].first;
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {static_cast<int>(f), mid, gain};
        }
      }
    }
    return best;
  }

  int grow(RegressionTree& tree, const std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.back().value = mean_of(rows);
    tree.nodes.back().count = rows.size();

    if (depth >= opt_.max_depth || rows.size() < 2 * static_cast<std::size_t>(opt_.min_leaf)) return index;
    const bool pure = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y_[r] == y_[rows.front()]; });
    if (pure) return index;

    const Split split = best_split(rows);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (x_[r][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(r);
    }
    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  const FeatureRows& x_;
  std::span<const double> y_;
  const ForestOptions& opt_;
  int mtry_;
  std::mt19937_64 rng_;
};

}  // namespace

double stable_mean(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("mean of nothing");
  long double sum = 0.0L;
  for (double v : values) sum += v;
  return static_cast<double>(sum / static_cast<long double>(values.size()));
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  // Children always come after their parent in the node list.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

double ForestModel::predict(std::span<const double> x) const {
  if (x.size() != n_features) throw DimensionMismatch("forest expects " + std::to_string(n_features) + " features");
  std::vector<double> per_tree(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) per_tree[t] = trees[t].predict(x);
  return stable_mean(per_tree);
}

double ForestModel::predict(const FeatureVector& fv) const { return predict(std::span<const double>(fv.values)); }

std::size_t ForestModel::node_count() const {
  std::size_t total = 0;
  for (const auto& t : trees) total += t.nodes.size();
  return total;
}

FeatureRows feature_rows(std::span<const FeatureVector> features) {
  FeatureRows rows;
  rows.reserve(features.size());
  for (const auto& fv : features) rows.emplace_back(fv.values.begin(), fv.values.end());
  return rows;
}

ForestModel fit_forest(const FeatureRows& x, std::span<const double> y, const ForestOptions& options) {
  if (x.empty() || y.empty()) throw EmptyInput("forest needs training rows");
  if (x.size() != y.size()) throw DimensionMismatch("feature rows and targets differ in length");
  if (x.size() < 2) throw EmptyInput("forest needs at least two rows");
  const std::size_t d = x.front().size();
  if (d == 0) throw EmptyInput("forest needs at least one feature");
  for (const auto& row : x) {
    if (row.size() != d) throw DimensionMismatch("ragged feature rows");
  }
  if (options.n_trees < 1 || options.max_depth < 0 || options.min_leaf < 1) throw Error("invalid forest options");

  int mtry = options.max_features;
  if (mtry <= 0) mtry = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
  mtry = std::clamp(mtry, 1, static_cast<int>(d));

  ForestModel model;
  model.n_features = d;
  model.seed = options.seed;
  model.max_depth = options.max_depth;
  model.min_leaf = options.min_leaf;
  model.max_features = mtry;
  model.bootstrap = options.bootstrap;
  model.trees.resize(static_cast<std::size_t>(options.n_trees));

  const std::size_t n = x.size();
  parallel_for(model.trees.size(), options.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = splitmix64(options.seed + t);
    std::mt19937_64 sample_rng(tree_seed);
    std::vector<std::size_t> rows(n);
    if (options.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(sample_rng);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(x, y, options, mtry, splitmix64(tree_seed));
    model.trees[t] = builder.build(std::move(rows));
  });
  return model;
}

}  // namespace vqa
