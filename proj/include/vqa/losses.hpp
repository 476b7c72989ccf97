#pragma once

#include <span>
#include <vector>

#include "vqa/branch_net.hpp"

namespace vqa {

inline constexpr double kDefaultRankMargin = 0.05;

struct RelLoss {
  double value = 0.0;
  double rank_term = 0.0;       // mean hinge over pairs with mos_i > mos_j
  double linearity_term = 0.0;  // 1 - PLCC(pred, mos)
  bool plcc_skipped = false;    // mos batch is constant
  std::vector<double> grad;     // d(value)/d(pred_i), filled on request
};

struct RelLossOptions {
  double margin = kDefaultRankMargin;
  double rank_weight = 1.0;
  double linearity_weight = 1.0;
};

/// rank_weight * margin-rank + linearity_weight * (1 - PLCC). Needs a batch
/// of at least two.
RelLoss rel_loss(std::span<const double> predictions, std::span<const double> mos, const RelLossOptions& options = {},
                 bool with_grad = false);

struct TotalLoss {
  double value = 0.0;
  std::vector<BranchScores> grad;  // per-sample d(value)/d(q_s, q_a, q_t)
};

/// Sum of rel_loss over the three branch scores against the same MOS.
TotalLoss total_loss(std::span<const BranchScores> scores, std::span<const double> mos,
                     const RelLossOptions& options = {}, bool with_grad = false);

enum class PairLabel { kABetter, kBBetter };

/// log(1 + exp(-(s_winner - s_loser))), evaluated without overflow.
double siamese_rank_loss(double score_a, double score_b, PairLabel label);
/// d(loss)/d(score_a); d/d(score_b) is its negation.
double siamese_rank_loss_grad(double score_a, double score_b, PairLabel label);

}  // namespace vqa
