#include "vqa/losses.hpp"

#include <algorithm>
#include <cmath>

#include "vqa/error.hpp"

namespace vqa {

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

RelLoss rel_loss(std::span<const double> pred, std::span<const double> mos, const RelLossOptions& options,
                 bool with_grad) {
  if (pred.size() != mos.size()) throw DimensionMismatch("predictions and MOS differ in length");
  const std::size_t n = pred.size();
  if (n < 2) throw EmptyInput("relative loss needs a batch of at least two");

  RelLoss out;
  std::vector<double> rank_grad(with_grad ? n : 0, 0.0);
  std::vector<double> lin_grad(with_grad ? n : 0, 0.0);

  std::size_t pairs = 0;
  double hinge = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(mos[i] > mos[j])) continue;
      ++pairs;
      const double h = options.margin - (pred[i] - pred[j]);
      if (h > 0) {
        hinge += h;
        if (with_grad) {
          rank_grad[i] -= 1.0;
          rank_grad[j] += 1.0;
        }
      }
    }
  }
  if (pairs > 0) {
    out.rank_term = hinge / static_cast<double>(pairs);
    for (double& g : rank_grad) g /= static_cast<double>(pairs);
  }

  const bool mos_constant = std::all_of(mos.begin(), mos.end(), [&](double m) { return m == mos.front(); });
  if (mos_constant) {
    out.plcc_skipped = true;
  } else {
    const double nd = static_cast<double>(n);
    double mp = 0.0;
    double mm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mp += pred[i];
      mm += mos[i];
    }
    mp /= nd;
    mm /= nd;
    double spm = 0.0;
    double spp = 0.0;
    double smm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      spm += (pred[i] - mp) * (mos[i] - mm);
      spp += (pred[i] - mp) * (pred[i] - mp);
      smm += (mos[i] - mm) * (mos[i] - mm);
    }
    if (spp > 0.0) {
      const double norm_p = std::sqrt(spp);
      const double norm_m = std::sqrt(smm);
      const double r = spm / (norm_p * norm_m);
      out.linearity_term = 1.0 - r;
      // dr/dp_i = m~_i / (|p~||m~|) - r p~_i / |p~|^2
      for (std::size_t i = 0; i < lin_grad.size(); ++i) {
        lin_grad[i] = -((mos[i] - mm) / (norm_p * norm_m) - r * (pred[i] - mp) / spp);
      }
    } else {
      // Constant predictions carry no linear information: PLCC taken as 0.
      out.linearity_term = 1.0;
    }
  }

  out.value = options.rank_weight * out.rank_term + options.linearity_weight * out.linearity_term;
  if (with_grad) {
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.grad[i] = options.rank_weight * rank_grad[i] + options.linearity_weight * lin_grad[i];
    }
  }
  return out;
}

TotalLoss total_loss(std::span<const BranchScores> scores, std::span<const double> mos, const RelLossOptions& options,
                     bool with_grad) {
  const std::size_t n = scores.size();
  std::vector<double> qs(n);
  std::vector<double> qa(n);
  std::vector<double> qt(n);
  for (std::size_t i = 0; i < n; ++i) {
    qs[i] = scores[i].q_s;
    qa[i] = scores[i].q_a;
    qt[i] = scores[i].q_t;
  }
  const RelLoss ls = rel_loss(qs, mos, options, with_grad);
  const RelLoss la = rel_loss(qa, mos, options, with_grad);
  const RelLoss lt = rel_loss(qt, mos, options, with_grad);
  TotalLoss out;
  out.value = ls.value + la.value + lt.value;
  if (with_grad) {
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.grad[i] = {ls.grad[i], la.grad[i], lt.grad[i]};
  }
  return out;
}

double siamese_rank_loss(double score_a, double score_b, PairLabel label) {
  const double diff = label == PairLabel::kABetter ? score_a - score_b : score_b - score_a;
  return softplus(-diff);
}

double siamese_rank_loss_grad(double score_a, double score_b, PairLabel label) {
  // d/d(diff) softplus(-diff) = -logistic(-diff)
  if (label == PairLabel::kABetter) return -logistic(-(score_a - score_b));
  return logistic(-(score_b - score_a));
}

}  // namespace vqa
