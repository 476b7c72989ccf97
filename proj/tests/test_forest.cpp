#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "vqa/error.hpp"
#include "vqa/forest.hpp"

using namespace vqa;

namespace {

struct Data {
  FeatureRows x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::size_t d, std::uint64_t seed, double noise = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, noise);
  Data out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (double& v : row) v = u(rng);
    out.y.push_back(std::sin(2 * row[0]) + row[1] * row[1] + g(rng));
    out.x.push_back(std::move(row));
  }
  return out;
}

// Smallest sum of squared errors over every axis-aligned split with at
// least min_leaf rows per side; returns (feature, left row set).
std::pair<int, std::vector<bool>> brute_force_split(const Data& data, std::size_t min_leaf) {
  const std::size_t n = data.y.size();
  long double best = std::numeric_limits<long double>::infinity();
  std::pair<int, std::vector<bool>> result{-1, {}};
  for (std::size_t f = 0; f < data.x[0].size(); ++f) {
    for (std::size_t t = 0; t < n; ++t) {
      const double thr = data.x[t][f];
      std::vector<bool> left(n);
      long double sl = 0, sr = 0;
      std::size_t nl = 0;
      for (std::size_t i = 0; i < n; ++i) {
        left[i] = data.x[i][f] <= thr;
        if (left[i]) {
          sl += data.y[i];
          ++nl;
        } else {
          sr += data.y[i];
        }
      }
      if (nl < min_leaf || n - nl < min_leaf) continue;
      const long double ml = sl / nl, mr = sr / (n - nl);
      long double sse = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const long double d = data.y[i] - (left[i] ? ml : mr);
        sse += d * d;
      }
      if (sse < best) {
        best = sse;
        result = {static_cast<int>(f), left};
      }
    }
  }
  return result;
}

double rmse_of(const std::vector<double>& pred, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
  return std::sqrt(s / y.size());
}

}  // namespace

TEST_CASE("constant targets predict the constant exactly") {
  Data d = make_data(50, 4, 1);
  for (double& v : d.y) v = 0.1;
  ForestOptions opt;
  opt.n_trees = 25;
  const ForestModel m = fit_forest(d.x, d.y, opt);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> q(4);
    for (double& v : q) v = u(rng);
    CHECK(m.predict(q) == 0.1);
  }
  CHECK(stable_mean(std::vector<double>(300, 0.1)) == 0.1);
}

TEST_CASE("single split stores side means") {
  FeatureRows x = {{0}, {0}, {0}, {1}, {1}};
  std::vector<double> y = {0.0, 0.0, 0.0, 1.0, 1.0};
  ForestOptions opt;
  opt.n_trees = 1;
  opt.max_depth = 1;
  opt.min_leaf = 1;
  opt.bootstrap = false;
  const ForestModel m = fit_forest(x, y, opt);
  CHECK(m.predict(std::vector<double>{0}) == 0.0);
  CHECK(m.predict(std::vector<double>{1}) == 1.0);
  REQUIRE(m.trees[0].nodes.size() == 3);
  CHECK(m.trees[0].nodes[0].threshold == 0.5);
  CHECK(m.trees[0].nodes[0].value == doctest::Approx(0.4));

  // noisy sides: means 0.3 and 0.8
  y = {0.2, 0.4, 0.3, 0.7, 0.9};
  const ForestModel n = fit_forest(x, y, opt);
  CHECK(n.predict(std::vector<double>{-5}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(n.predict(std::vector<double>{5}) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("root split matches brute-force search") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Data d = make_data(40, 3, seed + 10);
    ForestOptions opt;
    opt.n_trees = 1;
    opt.max_depth = 1;
    opt.min_leaf = 3;
    opt.max_features = 3;
    opt.bootstrap = false;
    const ForestModel m = fit_forest(d.x, d.y, opt);
    const auto [feature, left] = brute_force_split(d, 3);
    const TreeNode& root = m.trees[0].nodes[0];
    CHECK(root.feature == feature);
    for (std::size_t i = 0; i < d.y.size(); ++i) {
      CHECK((d.x[i][static_cast<std::size_t>(root.feature)] <= root.threshold) == left[i]);
    }
  }
}

TEST_CASE("tree structure invariants") {
  const Data d = make_data(200, 5, 3);
  ForestOptions opt;
  opt.n_trees = 10;
  opt.max_depth = 6;
  opt.min_leaf = 4;
  opt.bootstrap = false;
  opt.max_features = 5;
  const ForestModel m = fit_forest(d.x, d.y, opt);
  for (const auto& tree : m.trees) {
    CHECK(tree.depth() <= 6);
    // route the training rows and compare leaf values with their mean
    std::vector<long double> sum(tree.nodes.size(), 0);
    std::vector<std::size_t> count(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < d.y.size(); ++i) {
      std::size_t k = 0;
      while (tree.nodes[k].feature >= 0) {
        const TreeNode& n = tree.nodes[k];
        k = static_cast<std::size_t>(d.x[i][static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
      }
      sum[k] += d.y[i];
      ++count[k];
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].feature >= 0) continue;
      CHECK(count[k] == tree.nodes[k].count);
      CHECK(count[k] >= 4);
      CHECK(tree.nodes[k].value == doctest::Approx(static_cast<double>(sum[k] / count[k])).epsilon(1e-15));
    }
  }
}

TEST_CASE("forest prediction is the mean of its trees") {
  const Data d = make_data(100, 4, 4);
  ForestOptions opt;
  opt.n_trees = 37;
  const ForestModel m = fit_forest(d.x, d.y, opt);
  CHECK(m.max_features == 2);
  for (int i = 0; i < 20; ++i) {
    long double s = 0;
    for (const auto& t : m.trees) s += t.predict(d.x[i]);
    CHECK(m.predict(d.x[i]) == static_cast<double>(s / m.trees.size()));
  }
}

TEST_CASE("forest beats the mean predictor") {
  const Data train = make_data(400, 6, 5);
  const Data test = make_data(200, 6, 6);
  ForestOptions opt;
  opt.n_trees = 100;
  const ForestModel m = fit_forest(train.x, train.y, opt);
  std::vector<double> pred, base(test.y.size(), stable_mean(train.y));
  for (const auto& row : test.x) pred.push_back(m.predict(row));
  const double r = rmse_of(pred, test.y);
  const double b = rmse_of(base, test.y);
  MESSAGE("forest rmse " << r << " vs mean " << b);
  CHECK(r < 0.6 * b);
}

TEST_CASE("fitting is reproducible across runs and threads") {
  const Data d = make_data(150, 5, 7);
  ForestOptions opt;
  opt.n_trees = 40;
  opt.seed = 11;
  opt.threads = 1;
  const ForestModel a = fit_forest(d.x, d.y, opt);
  const ForestModel b = fit_forest(d.x, d.y, opt);
  opt.threads = 4;
  const ForestModel c = fit_forest(d.x, d.y, opt);
  opt.seed = 12;
  const ForestModel e = fit_forest(d.x, d.y, opt);
  for (const auto& row : d.x) {
    CHECK(a.predict(row) == b.predict(row));
    CHECK(a.predict(row) == c.predict(row));
  }
  CHECK(a.node_count() == c.node_count());
  bool differs = false;
  for (const auto& row : d.x) differs |= a.predict(row) != e.predict(row);
  CHECK(differs);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(fit_forest({}, std::vector<double>{}), EmptyInput);
  CHECK_THROWS_AS(fit_forest({{1.0}, {2.0}}, std::vector<double>{1.0}), DimensionMismatch);
  CHECK_THROWS_AS(fit_forest({{1.0}, {2.0, 3.0}}, std::vector<double>{1.0, 2.0}), DimensionMismatch);
  ForestOptions bad;
  bad.n_trees = 0;
  CHECK_THROWS_AS(fit_forest({{1.0}, {2.0}}, std::vector<double>{1.0, 2.0}, bad), Error);
  const ForestModel m = fit_forest({{1.0, 0.0}, {2.0, 1.0}}, std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(m.predict(std::vector<double>{1.0}), DimensionMismatch);
  CHECK_THROWS_AS(stable_mean(std::vector<double>{}), EmptyInput);

  std::vector<FeatureVector> fvs(2);
  fvs[1].values[3] = 7.0;
  const FeatureRows rows = feature_rows(fvs);
  CHECK(rows.size() == 2);
  CHECK(rows[1].size() == kFeatureCount);
  CHECK(rows[1][3] == 7.0);
}
