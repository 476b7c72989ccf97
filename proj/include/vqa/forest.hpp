#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vqa/features.hpp"

namespace vqa {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean target of the training rows reaching this node
  std::size_t count = 0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
  int depth() const;
};

struct ForestOptions {
  int n_trees = 300;
  int max_depth = 12;
  int min_leaf = 2;
  // Features tried per node; 0 picks round(sqrt(d)).
  int max_features = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
  int max_depth = 0;
  int min_leaf = 0;
  int max_features = 0;
  bool bootstrap = true;

  double predict(std::span<const double> x) const;
  double predict(const FeatureVector& fv) const;
  std::size_t node_count() const;
};

using FeatureRows = std::vector<std::vector<double>>;

/// Fits each tree on its own bootstrap sample with a seed derived from
/// (seed, tree index), so the model does not depend on the thread count.
ForestModel fit_forest(const FeatureRows& x, std::span<const double> y, const ForestOptions& options = {});

FeatureRows feature_rows(std::span<const FeatureVector> features);

/// Mean of n values accumulated in extended precision; exact for repeated values.
double stable_mean(std::span<const double> values);

}  // namespace vqa
