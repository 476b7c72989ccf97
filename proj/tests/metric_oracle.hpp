#pragma once

// Brute-force O(n^2) correlation references in extended precision. Undefined
// correlations come back as nullopt.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace oracle {

using real = long double;

inline std::vector<real> ranks(std::span<const double> v) {
  std::vector<real> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    r[i] = static_cast<real>(less) + (static_cast<real>(equal) + 1) / 2;
  }
  return r;
}

inline std::optional<real> pearson(const std::vector<real>& x, const std::vector<real>& y) {
  const real n = static_cast<real>(x.size());
  real mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  real sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<real> widen(std::span<const double> v) { return {v.begin(), v.end()}; }

inline bool constant(std::span<const double> v) {
  for (double a : v) {
    if (a != v[0]) return false;
  }
  return true;
}

inline std::optional<real> plcc(std::span<const double> x, std::span<const double> y) {
  if (constant(x) || constant(y)) return std::nullopt;
  return pearson(widen(x), widen(y));
}

inline std::optional<real> srocc(std::span<const double> x, std::span<const double> y) {
  if (constant(x) || constant(y)) return std::nullopt;
  return pearson(ranks(x), ranks(y));
}

inline std::optional<real> krocc(std::span<const double> x, std::span<const double> y) {
  long long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0, pairs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++pairs;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0) ++tie_x;
      if (dy == 0) ++tie_y;
      if (dx * dy > 0) ++concordant;
      if (dx * dy < 0) ++discordant;
    }
  }
  if (tie_x == pairs || tie_y == pairs) return std::nullopt;
  return static_cast<real>(concordant - discordant) /
         std::sqrt(static_cast<real>(pairs - tie_x) * static_cast<real>(pairs - tie_y));
}

inline real rmse(std::span<const double> x, std::span<const double> y) {
  real s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const real d = static_cast<real>(x[i]) - y[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<real>(x.size()));
}

}  // namespace oracle
