#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace vqa {

inline constexpr int kLevelCount = 5;

/// Probabilities over {bad, poor, fair, good, excellent} (levels 1..5).
struct LevelDistribution {
  std::array<double, kLevelCount> p{};
};

struct ScoreRange {
  double min = 1.0;
  double max = 5.0;
};

/// Level i in 1..5 such that min + (i-1)/5*(max-min) < s <= min + i/5*(max-min).
/// s == min maps to level 1. Throws OutOfRange outside [min, max].
int bin_score(double s, const ScoreRange& range);

/// Midpoint of level i's interval.
double level_midpoint(int level, const ScoreRange& range);

/// Max-subtracted softmax over five level logits.
LevelDistribution softmax_levels(std::span<const double, kLevelCount> logits);

/// sum_i i * p_i, in [1, 5].
double expected_score(const LevelDistribution& dist);

enum class Normalization { kNone, kZScore };

struct FusionSpec {
  std::vector<double> weights;
  Normalization normalization = Normalization::kNone;
};

Normalization parse_normalization(const std::string& name);
std::string normalization_name(Normalization n);

/// {"weights":[7,8],"normalization":"none"}
FusionSpec fusion_spec_from_json(const std::string& text);
std::string fusion_spec_to_json(const FusionSpec& spec);

/// Per clip: sum_k w_k s_k / sum_k w_k, each list optionally z-scored first.
/// Throws DegenerateScores(k) for a zero-variance list under z-scoring.
std::vector<double> fuse_scores(std::span<const std::vector<double>> score_lists, const FusionSpec& spec);

}  // namespace vqa
