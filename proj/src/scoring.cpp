#include "vqa/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "vqa/error.hpp"

namespace vqa {

int bin_score(double s, const ScoreRange& range) {
  if (!(range.max > range.min)) throw Error("score range needs max > min");
  if (!(s >= range.min && s <= range.max)) {
    throw OutOfRange("score " + std::to_string(s) + " outside [" + std::to_string(range.min) + ", " +
                     std::to_string(range.max) + "]");
  }
  const double span = range.max - range.min;
  for (int i = 1; i <= kLevelCount; ++i) {
    if (s <= range.min + static_cast<double>(i) / kLevelCount * span) return i;
  }
  return kLevelCount;
}

double level_midpoint(int level, const ScoreRange& range) {
  if (level < 1 || level > kLevelCount) throw OutOfRange("level " + std::to_string(level));
  const double span = range.max - range.min;
  return range.min + (level - 0.5) / kLevelCount * span;
}

LevelDistribution softmax_levels(std::span<const double, kLevelCount> logits) {
  for (const double x : logits) {
    if (!std::isfinite(x)) throw NumericalError("non-finite level logit");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  LevelDistribution d;
  double total = 0.0;
  for (int i = 0; i < kLevelCount; ++i) {
    d.p[i] = std::exp(logits[i] - top);
    total += d.p[i];
  }
  for (double& p : d.p) p /= total;
  return d;
}

double expected_score(const LevelDistribution& dist) {
  // sum_i i*p_i rewritten around the centre level using sum_i p_i = 1, so
  // symmetric distributions land exactly on 3.
  const auto& p = dist.p;
  return 3.0 + 2.0 * (p[4] - p[0]) + (p[3] - p[1]);
}

Normalization parse_normalization(const std::string& name) {
  if (name == "none") return Normalization::kNone;
  if (name == "zscore") return Normalization::kZScore;
  throw Error("unknown normalization '" + name + "'");
}

std::string normalization_name(Normalization n) { return n == Normalization::kZScore ? "zscore" : "none"; }

FusionSpec fusion_spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  FusionSpec spec;
  spec.weights = j.at("weights").get<std::vector<double>>();
  spec.normalization = parse_normalization(j.value("normalization", std::string("none")));
  return spec;
}

std::string fusion_spec_to_json(const FusionSpec& spec) {
  nlohmann::ordered_json j;
  j["weights"] = spec.weights;
  j["normalization"] = normalization_name(spec.normalization);
  return j.dump();
}

std::vector<double> fuse_scores(std::span<const std::vector<double>> lists, const FusionSpec& spec) {
  if (lists.empty()) throw EmptyInput("no score lists to fuse");
  if (spec.weights.size() != lists.size()) {
    throw DimensionMismatch(std::to_string(spec.weights.size()) + " weights for " + std::to_string(lists.size()) +
                            " score lists");
  }
  const std::size_t n = lists.front().size();
  if (n == 0) throw EmptyInput("score lists are empty");
  for (const auto& l : lists) {
    if (l.size() != n) throw DimensionMismatch("score lists differ in length");
  }
  double weight_sum = 0.0;
  for (const double w : spec.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("fusion weights must be finite and non-negative");
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) throw Error("fusion weights sum to zero");

  std::vector<std::vector<double>> normalized;
  std::span<const std::vector<double>> inputs = lists;
  if (spec.normalization == Normalization::kZScore) {
    normalized.reserve(lists.size());
    for (std::size_t k = 0; k < lists.size(); ++k) {
      const auto& l = lists[k];
      const double mean = std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(n);
      double ss = 0.0;
      for (const double v : l) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n));
      if (!(sd > 0.0)) throw DegenerateScores(k);
      std::vector<double> z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = (l[i] - mean) / sd;
      normalized.push_back(std::move(z));
    }
    inputs = normalized;
  }

  if (inputs.size() == 1) return inputs.front();

  std::vector<double> fused(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) acc += spec.weights[k] * inputs[k][i];
    fused[i] = acc / weight_sum;
  }
  return fused;
}

}  // namespace vqa
