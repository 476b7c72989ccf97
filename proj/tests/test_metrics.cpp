#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "metric_oracle.hpp"
#include "vqa/error.hpp"
#include "vqa/metrics.hpp"

using namespace vqa;

namespace {

using Vec = std::vector<double>;

void check_against_oracle(const Vec& x, const Vec& y) {
  CAPTURE(x);
  CAPTURE(y);
  const auto s = oracle::srocc(x, y);
  const auto k = oracle::krocc(x, y);
  const auto p = oracle::plcc(x, y);
  if (s) {
    CHECK(std::abs(srocc(x, y) - static_cast<double>(*s)) <= 1e-12);
  } else {
    CHECK_THROWS_AS(srocc(x, y), UndefinedCorrelation);
  }
  if (k) {
    CHECK(std::abs(krocc(x, y) - static_cast<double>(*k)) <= 1e-12);
  } else {
    CHECK_THROWS_AS(krocc(x, y), UndefinedCorrelation);
  }
  if (p) {
    CHECK(std::abs(plcc(x, y) - static_cast<double>(*p)) <= 1e-12);
  } else {
    CHECK_THROWS_AS(plcc(x, y), UndefinedCorrelation);
  }
  CHECK(std::abs(rmse(x, y) - static_cast<double>(oracle::rmse(x, y))) <= 1e-12);
}

Vec random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 3.0);
  Vec v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("spearman examples") {
  CHECK(srocc(Vec{1, 2, 3}, Vec{10, 20, 30}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(srocc(Vec{1, 2, 3}, Vec{30, 20, 10}) == doctest::Approx(-1.0).epsilon(1e-15));
  // ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4)
  const double hand = 4.5 / std::sqrt(4.5 * 5.0);
  CHECK(srocc(Vec{1, 2, 2, 3}, Vec{1, 3, 2, 4}) == doctest::Approx(hand).epsilon(1e-14));
  CHECK(average_ranks(Vec{5, 1, 5, 3}) == Vec{3.5, 1, 3.5, 2});
}

TEST_CASE("kendall examples") {
  CHECK(krocc(Vec{1, 2, 3, 4, 5}, Vec{2, 4, 6, 8, 10}) == 1.0);
  // pairs: (1,2) tied in x; (1,3) and (2,3) concordant -> 2 / sqrt(2 * 3)
  CHECK(krocc(Vec{1, 1, 2}, Vec{1, 2, 3}) == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-14));
  CHECK(krocc(Vec{1, 2, 3}, Vec{1, 1, 2}) == krocc(Vec{1, 1, 2}, Vec{1, 2, 3}));
  CHECK_THROWS_AS(krocc(Vec{1, 1, 1}, Vec{1, 2, 3}), UndefinedCorrelation);
}

TEST_CASE("pearson and rmse examples") {
  const Vec x = {0.5, 1.0, 2.0, 4.0};
  Vec y;
  for (double v : x) y.push_back(2 * v + 1);
  CHECK(plcc(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  double ss = 0;
  for (double v : x) ss += (v + 1) * (v + 1);
  CHECK(rmse(x, y) == doctest::Approx(std::sqrt(ss / 4)).epsilon(1e-15));
  CHECK(rmse(x, x) == 0.0);
  CHECK(rmse(Vec{2, 2}, Vec{2, 2}) == 0.0);
  CHECK_THROWS_AS(plcc(Vec{2, 2}, Vec{1, 2}), UndefinedCorrelation);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(srocc(Vec{1, 2}, Vec{1, 2, 3}), DimensionMismatch);
  CHECK_THROWS_AS(plcc(Vec{1}, Vec{1}), EmptyInput);
  CHECK_THROWS_AS(rmse(Vec{}, Vec{}), EmptyInput);
  CHECK_THROWS_AS(krocc(Vec{1, NAN}, Vec{1, 2}), NumericalError);
}

TEST_CASE("oracle agreement on small integer vectors") {
  for (std::size_t n = 2; n <= 4; ++n) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    for (std::size_t a = 0; a < total; ++a) {
      for (std::size_t b = 0; b < total; ++b) {
        Vec x(n), y(n);
        std::size_t ca = a, cb = b;
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = 1.0 + static_cast<double>(ca % 3);
          y[i] = 1.0 + static_cast<double>(cb % 3);
          ca /= 3;
          cb /= 3;
        }
        check_against_oracle(x, y);
      }
    }
  }
}

TEST_CASE("oracle agreement on random vectors") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(2, 50);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = len(rng);
    check_against_oracle(random_vec(rng, n), random_vec(rng, n));
  }
  // heavy ties from rounding
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = len(rng);
    Vec x = random_vec(rng, n), y = random_vec(rng, n);
    for (double& v : x) v = std::round(v);
    for (double& v : y) v = std::round(v / 2);
    check_against_oracle(x, y);
  }
}

TEST_CASE("transform invariances") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const Vec x = random_vec(rng, 30);
    const Vec y = random_vec(rng, 30);
    Vec ex, affine, neg;
    for (double v : x) {
      ex.push_back(std::exp(v));
      affine.push_back(3.5 * v - 2.0);
      neg.push_back(-0.25 * v + 1.0);
    }
    CHECK(srocc(ex, y) == doctest::Approx(srocc(x, y)).epsilon(1e-12));
    CHECK(krocc(ex, y) == doctest::Approx(krocc(x, y)).epsilon(1e-12));
    CHECK(plcc(affine, y) == doctest::Approx(plcc(x, y)).epsilon(1e-12));
    CHECK(plcc(neg, y) == doctest::Approx(-plcc(x, y)).epsilon(1e-12));
    CHECK(std::abs(srocc(x, y)) <= 1.0);
    CHECK(std::abs(krocc(x, y)) <= 1.0);
    const Vec z = random_vec(rng, 30);
    CHECK(rmse(x, z) <= rmse(x, y) + rmse(y, z) + 1e-12);
  }
}

TEST_CASE("table evaluation joins on clip id") {
  const ScoreTable mos = {{"a", 1.0}, {"b", 2.5}, {"c", 4.0}, {"d", 3.0}};
  const MetricReport self = evaluate(mos, mos);
  CHECK(self.srocc == doctest::Approx(1.0));
  CHECK(self.krocc == doctest::Approx(1.0));
  CHECK(self.plcc == doctest::Approx(1.0));
  CHECK(self.rmse == 0.0);

  const ScoreTable pred = {{"c", 3.9}, {"a", 1.4}, {"d", 2.0}, {"b", 2.2}};
  ScoreTable shuffled = pred;
  std::reverse(shuffled.begin(), shuffled.end());
  const MetricReport r1 = evaluate(pred, mos);
  const MetricReport r2 = evaluate(shuffled, mos);
  CHECK(r1.srocc == r2.srocc);
  CHECK(r1.krocc == r2.krocc);
  CHECK(r1.plcc == r2.plcc);
  CHECK(r1.rmse == r2.rmse);
  const Vec p = {1.4, 2.2, 3.9, 2.0};
  const Vec m = {1.0, 2.5, 4.0, 3.0};
  CHECK(r1.plcc == doctest::Approx(static_cast<double>(*oracle::plcc(p, m))).epsilon(1e-12));

  try {
    evaluate(ScoreTable{{"a", 1}, {"zz", 2}}, mos);
    FAIL("expected JoinError");
  } catch (const JoinError& e) {
    CHECK(e.id() == "zz");
  }
  CHECK_THROWS_AS(evaluate(ScoreTable{{"a", 1}, {"a", 2}}, mos), DuplicateId);
  CHECK_THROWS_AS(evaluate(mos, ScoreTable{{"a", 1}, {"a", 2}, {"b", 1}, {"c", 1}, {"d", 1}}), DuplicateId);
}

TEST_CASE("report json") {
  const std::string j = metric_report_to_json({0.5, -0.25, 1.0, 0.1234567});
  CHECK(j == R"({"srocc":0.500000,"krocc":-0.250000,"plcc":1.000000,"rmse":0.123457})");
}
