#include "vqa/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "vqa/error.hpp"
#include "vqa/parallel.hpp"

namespace vqa {

namespace {

bool has_distinct_mos(const Dataset& d) {
  return d.mos.size() >= 2 &&
         std::any_of(d.mos.begin(), d.mos.end(), [&](double m) { return m != d.mos.front(); });
}

void check_dataset(const Dataset& d) {
  if (d.features.size() != d.mos.size()) throw DimensionMismatch("dataset '" + d.name + "' features/MOS length differ");
  if (d.mos.size() < 2) throw EmptyInput("dataset '" + d.name + "' needs at least two items");
}

void apply_update(BranchNet& net, const std::vector<double>& grad, const TrainConfig& config) {
  std::vector<double> theta = flatten_parameters(net);
  const double decay = 1.0 - config.learning_rate * config.weight_decay;
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = decay * theta[i] - config.learning_rate * grad[i];
  assign_parameters(net, theta);
}

// Sums per-item flattened gradients in item order.
std::vector<double> reduce_in_order(const std::vector<std::vector<double>>& parts, double scale) {
  std::vector<double> total(parts.front().size(), 0.0);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += p[i];
  }
  for (double& v : total) v *= scale;
  return total;
}

struct PairDraw {
  std::size_t dataset;
  std::size_t a;
  std::size_t b;
  PairLabel label;
  DropoutMasks mask_a;
  DropoutMasks mask_b;
};

}  // namespace

double pairwise_accuracy(std::span<const double> pred, std::span<const double> mos) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < mos.size(); ++i) {
    for (std::size_t j = i + 1; j < mos.size(); ++j) {
      if (mos[i] == mos[j]) continue;
      ++total;
      if ((mos[i] > mos[j]) == (pred[i] > pred[j]) && pred[i] != pred[j]) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

BranchNet train_siamese(std::span<const Dataset> datasets, BranchNet net, const TrainConfig& config, TrainLog* log) {
  if (datasets.empty()) throw EmptyInput("no datasets for siamese training");
  for (const auto& d : datasets) check_dataset(d);
  if (config.batch_size < 1) throw Error("batch size must be positive");
  if (config.epochs <= 0) return net;

  std::vector<std::size_t> trainable;
  std::vector<double> weights;
  std::size_t total_items = 0;
  for (std::size_t k = 0; k < datasets.size(); ++k) {
    if (!has_distinct_mos(datasets[k])) continue;
    trainable.push_back(k);
    weights.push_back(static_cast<double>(datasets[k].mos.size()));
    total_items += datasets[k].mos.size();
  }
  if (trainable.empty()) throw NoTrainablePairs();

  // Route once; inputs do not change during training.
  std::vector<std::vector<BranchInputs>> inputs(datasets.size());
  for (std::size_t k = 0; k < datasets.size(); ++k) {
    for (const auto& fv : datasets[k].features) inputs[k].push_back(route_features(net, fv));
  }

  std::mt19937_64 rng(config.seed);
  std::discrete_distribution<std::size_t> pick_dataset(weights.begin(), weights.end());
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t steps = std::max<std::size_t>(1, (total_items + batch - 1) / batch);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> samples(datasets.size(), 0);
    double epoch_loss = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      // Draw serially so the random stream is independent of threading.
      std::vector<PairDraw> draws;
      draws.reserve(batch);
      for (std::size_t p = 0; p < batch; ++p) {
        const std::size_t k = trainable[pick_dataset(rng)];
        const auto& mos = datasets[k].mos;
        std::uniform_int_distribution<std::size_t> pick_item(0, mos.size() - 1);
        std::size_t a = pick_item(rng);
        std::size_t b = pick_item(rng);
        while (mos[a] == mos[b]) {
          a = pick_item(rng);
          b = pick_item(rng);
        }
        PairDraw draw{k, a, b, mos[a] > mos[b] ? PairLabel::kABetter : PairLabel::kBBetter, {}, {}};
        if (config.gate_dropout) {
          draw.mask_a = sample_dropout(net, rng);
          draw.mask_b = sample_dropout(net, rng);
        }
        draws.push_back(std::move(draw));
        ++samples[k];
      }

      std::vector<std::vector<double>> grads(draws.size());
      std::vector<double> losses(draws.size());
      parallel_for(draws.size(), config.threads, [&](std::size_t p) {
        const PairDraw& d = draws[p];
        ForwardCache ca;
        ForwardCache cb;
        const DropoutMasks* ma = config.gate_dropout ? &d.mask_a : nullptr;
        const DropoutMasks* mb = config.gate_dropout ? &d.mask_b : nullptr;
        const double sa = forward(net, inputs[d.dataset][d.a], &ca, ma).final_score();
        const double sb = forward(net, inputs[d.dataset][d.b], &cb, mb).final_score();
        losses[p] = siamese_rank_loss(sa, sb, d.label);
        const double ga = siamese_rank_loss_grad(sa, sb, d.label) / 3.0;
        BranchNet g = zeros_like(net);
        backward(net, ca, {ga, ga, ga}, g);
        backward(net, cb, {-ga, -ga, -ga}, g);
        grads[p] = flatten_parameters(g);
      });
      for (const double l : losses) epoch_loss += l;
      apply_update(net, reduce_in_order(grads, 1.0 / static_cast<double>(draws.size())), config);
    }
    if (log) {
      log->epochs.push_back(
          {"siamese", epoch, epoch_loss / static_cast<double>(steps * batch), std::move(samples)});
    }
  }
  return net;
}

double dataset_total_loss(const BranchNet& net, const Dataset& dataset, const RelLossOptions& options) {
  std::vector<BranchScores> scores;
  scores.reserve(dataset.features.size());
  for (const auto& fv : dataset.features) scores.push_back(forward(net, fv));
  return total_loss(scores, dataset.mos, options).value;
}

BranchNet total_loss_gradient(const BranchNet& net, std::span<const BranchInputs> inputs, std::span<const double> mos,
                              const RelLossOptions& options) {
  std::vector<ForwardCache> caches(inputs.size());
  std::vector<BranchScores> scores(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) scores[i] = forward(net, inputs[i], &caches[i]);
  const TotalLoss loss = total_loss(scores, mos, options, true);
  BranchNet g = zeros_like(net);
  for (std::size_t i = 0; i < inputs.size(); ++i) backward(net, caches[i], loss.grad[i], g);
  return g;
}

BranchNet finetune_mos(const Dataset& dataset, BranchNet net, const TrainConfig& config, TrainLog* log) {
  check_dataset(dataset);
  if (!has_distinct_mos(dataset)) throw NoTrainablePairs();
  if (config.batch_size < 2) throw Error("fine-tuning batch size must be at least 2");
  const RelLossOptions options = config.loss_options();
  if (log) log->epochs.push_back({"finetune", 0, dataset_total_loss(net, dataset, options), {}});
  if (config.epochs <= 0) return net;

  std::vector<BranchInputs> inputs;
  inputs.reserve(dataset.features.size());
  for (const auto& fv : dataset.features) inputs.push_back(route_features(net, fv));

  std::mt19937_64 rng(config.seed);
  const std::size_t n = dataset.mos.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0, end = 0; start < n; start = end) {
      end = std::min(n, start + batch);
      if (n - end < 2) end = n;  // fold a 1-item tail into this batch
      const std::size_t m = end - start;

      std::vector<DropoutMasks> masks(m);
      if (config.gate_dropout) {
        for (auto& mask : masks) mask = sample_dropout(net, rng);
      }
      std::vector<ForwardCache> caches(m);
      std::vector<BranchScores> scores(m);
      std::vector<double> mos(m);
      parallel_for(m, config.threads, [&](std::size_t i) {
        scores[i] = forward(net, inputs[order[start + i]], &caches[i], config.gate_dropout ? &masks[i] : nullptr);
      });
      for (std::size_t i = 0; i < m; ++i) mos[i] = dataset.mos[order[start + i]];
      const TotalLoss loss = total_loss(scores, mos, options, true);

      std::vector<std::vector<double>> grads(m);
      parallel_for(m, config.threads, [&](std::size_t i) {
        BranchNet g = zeros_like(net);
        backward(net, caches[i], loss.grad[i], g);
        grads[i] = flatten_parameters(g);
      });
      apply_update(net, reduce_in_order(grads, 1.0), config);
    }
    if (log) log->epochs.push_back({"finetune", epoch, dataset_total_loss(net, dataset, options), {}});
  }
  return net;
}

}  // namespace vqa
