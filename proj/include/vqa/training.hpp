#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vqa/branch_net.hpp"
#include "vqa/features.hpp"
#include "vqa/losses.hpp"

namespace vqa {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 10;
  int batch_size = 16;
  std::uint64_t seed = 0;
  double rank_margin = kDefaultRankMargin;
  double rank_weight = 1.0;
  double linearity_weight = 1.0;
  double weight_decay = 0.05;  // decoupled: theta *= (1 - lr * wd)
  bool gate_dropout = true;
  int threads = 1;

  RelLossOptions loss_options() const { return {rank_margin, rank_weight, linearity_weight}; }
};

/// One scoring scale: features and MOS of the same length.
struct Dataset {
  std::string name;
  std::vector<FeatureVector> features;
  std::vector<double> mos;
};

struct EpochRecord {
  std::string phase;  // "siamese" or "finetune"
  int epoch = 0;      // 0 = before the first update
  double loss = 0.0;
  std::vector<std::size_t> dataset_samples;  // pairs drawn per dataset (siamese)
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

/// Pairwise training on the final score. Each pair comes from a single
/// dataset, so MOS scales never have to agree across datasets.
/// Throws NoTrainablePairs when no dataset has two distinct MOS values.
BranchNet train_siamese(std::span<const Dataset> datasets, BranchNet net, const TrainConfig& config,
                        TrainLog* log = nullptr);

/// Mini-batch descent on the three-branch relative loss.
BranchNet finetune_mos(const Dataset& dataset, BranchNet net, const TrainConfig& config, TrainLog* log = nullptr);

/// Full-dataset total loss in inference mode.
double dataset_total_loss(const BranchNet& net, const Dataset& dataset, const RelLossOptions& options = {});

/// Analytic gradient of the batch total loss (inference mode), shaped like the net.
BranchNet total_loss_gradient(const BranchNet& net, std::span<const BranchInputs> inputs, std::span<const double> mos,
                              const RelLossOptions& options = {});

/// Fraction of pairs with distinct MOS whose predicted order agrees.
double pairwise_accuracy(std::span<const double> predictions, std::span<const double> mos);

}  // namespace vqa
