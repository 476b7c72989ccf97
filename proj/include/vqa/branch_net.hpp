#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vqa/features.hpp"

namespace vqa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Dense {
  MatrixXd weight;
  VectorXd bias;
};

/// Cross-gating fusion: out = output * ((input * x) .* sigmoid(gate * y)) + x.
struct ScgbParams {
  MatrixXd input_proj;   // proj x dim(x)
  MatrixXd gate_proj;    // proj x dim(y)
  MatrixXd output_proj;  // dim(x) x proj
  double gate_dropout = 0.1;
};

/// Two-layer MLP ending in a scalar score.
struct Head {
  Dense hidden;  // tanh
  Dense out;     // 1 x hidden
};

struct BranchNetDims {
  int technical_in = static_cast<int>(kTechnicalFeatures.size());
  int aesthetic_in = static_cast<int>(kAestheticFeatures.size());
  int semantic_in = static_cast<int>(kSemanticFeatures.size());
  int hidden = 8;
  int proj = 8;
  int head_hidden = 8;

  friend bool operator==(const BranchNetDims&, const BranchNetDims&) = default;
};

/// Per-feature standardization applied before routing into branches.
struct InputScaler {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> scale{};  // 1 / stddev

  InputScaler() { scale.fill(1.0); }
  static InputScaler fit(std::span<const FeatureVector> rows);
};

/// Three-branch network: technical, aesthetic and semantic-proxy encoders;
/// the semantic branch gates the other two through SCGB blocks; each
/// branch has its own quality head and the final score is their mean.
struct BranchNet {
  BranchNetDims dims;
  InputScaler scaler;
  Dense technical_enc;
  Dense aesthetic_enc;
  Dense semantic_enc;
  ScgbParams aesthetic_fusion;
  ScgbParams technical_fusion;
  Head semantic_head;
  Head aesthetic_head;
  Head technical_head;
  std::uint64_t init_seed = 0;
};

struct BranchInputs {
  VectorXd technical;
  VectorXd aesthetic;
  VectorXd semantic;
};

struct BranchScores {
  double q_s = 0.0;
  double q_a = 0.0;
  double q_t = 0.0;
  double final_score() const { return (q_s + q_a + q_t) / 3.0; }
};

/// Small random initialisation (scaled normal), deterministic in seed.
BranchNet init_branch_net(const BranchNetDims& dims, std::uint64_t seed);
/// Same architecture, every trainable parameter zero.
BranchNet zeros_like(const BranchNet& net);

std::size_t parameter_count(const BranchNet& net);
std::vector<double> flatten_parameters(const BranchNet& net);
void assign_parameters(BranchNet& net, std::span<const double> params);

/// Standardizes and routes a feature vector into the three branch inputs.
BranchInputs route_features(const BranchNet& net, const FeatureVector& fv);

VectorXd scgb_fuse(const VectorXd& x, const VectorXd& y, const ScgbParams& p);

/// Per-element keep/scale factors for the gated product; empty = inference.
struct DropoutMasks {
  VectorXd aesthetic;
  VectorXd technical;
};

DropoutMasks sample_dropout(const BranchNet& net, std::mt19937_64& rng);

/// Intermediate activations kept for backpropagation.
struct ForwardCache {
  BranchInputs in;
  VectorXd h_t, h_a, h_s;
  VectorXd u_a, g_a, u_t, g_t;
  VectorXd fused_a, fused_t;
  VectorXd z_s, z_a, z_t;  // head hidden activations
  std::optional<DropoutMasks> masks;
};

/// Throws NumericalError on any non-finite intermediate.
BranchScores forward(const BranchNet& net, const BranchInputs& in, ForwardCache* cache = nullptr,
                     const DropoutMasks* masks = nullptr);
BranchScores forward(const BranchNet& net, const FeatureVector& fv);

/// Accumulates d(loss)/d(params) into grad given upstream d(loss)/d(q_s, q_a, q_t).
void backward(const BranchNet& net, const ForwardCache& cache, const BranchScores& upstream, BranchNet& grad);

}  // namespace vqa
