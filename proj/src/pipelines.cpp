#include "vqa/pipelines.hpp"

#include <algorithm>

#include "vqa/error.hpp"
#include "vqa/features.hpp"
#include "vqa/sampling.hpp"
#include "vqa/synthetic.hpp"

namespace vqa {

namespace {

constexpr TemporalMode kReferenceSampling = TemporalMode::kFrankenstoneReduce;

std::vector<PipelineStep> feature_steps(int threads) {
  return {
      {"sample",
       [](const VideoClip& clip, const std::any&) -> std::any { return temporal_sample(clip, kReferenceSampling); }},
      {"features",
       [threads](const VideoClip& clip, const std::any& plan) -> std::any {
         return extract_clip_features(clip, std::any_cast<const TemporalPlan&>(plan), threads);
       }},
  };
}

std::int64_t reference_frames(const ClipSpec& spec) {
  return static_cast<std::int64_t>(temporal_sample(static_cast<std::size_t>(spec.frame_count), Fps{30, 1},
                                                   kReferenceSampling)
                                       .indices.size());
}

void append_linear(PipelineDescriptor& d, std::int64_t in, std::int64_t out) {
  d.stages.push_back(stage::Linear{in, out, 1, false});
}

PipelineDescriptor branch_net_descriptor(const BranchNet& net, const ClipSpec& spec) {
  PipelineDescriptor d = feature_descriptor(spec, reference_frames(spec));
  const auto& dims = net.dims;
  append_linear(d, dims.technical_in, dims.hidden);
  append_linear(d, dims.aesthetic_in, dims.hidden);
  append_linear(d, dims.semantic_in, dims.hidden);
  for (int block = 0; block < 2; ++block) {
    append_linear(d, dims.hidden, dims.proj);
    append_linear(d, dims.hidden, dims.proj);
    append_linear(d, dims.proj, dims.hidden);
  }
  for (int head = 0; head < 3; ++head) {
    append_linear(d, dims.hidden, dims.head_hidden);
    append_linear(d, dims.head_hidden, 1);
  }
  return d;
}

}  // namespace

const std::vector<std::string>& pipeline_names() {
  static const std::vector<std::string> names = {"identity", "features", "feature_forest", "branchnet"};
  return names;
}

PipelineDescriptor feature_descriptor(const ClipSpec& spec, std::int64_t frames) {
  PipelineDescriptor d;
  d.frames_per_clip = frames;
  const std::int64_t pixels = static_cast<std::int64_t>(spec.width) * spec.height;
  for (auto name : kFeatureNames) d.stages.push_back(stage::Feature{std::string(name), pixels, true});
  return d;
}

ForestModel reference_forest(std::uint64_t seed, int threads) {
  CorpusOptions opts;
  opts.seed = seed + 1;
  opts.threads = threads;
  const auto corpus = synthetic_corpus(opts);
  std::vector<FeatureVector> features;
  std::vector<double> mos;
  for (const auto& item : corpus) {
    features.push_back(item.features);
    mos.push_back(item.mos);
  }
  ForestOptions fo;
  fo.seed = seed;
  fo.threads = threads;
  return fit_forest(feature_rows(features), mos, fo);
}

BranchNet reference_branch_net(std::uint64_t seed, int threads) {
  CorpusOptions opts;
  opts.seed = seed + 1;
  opts.threads = threads;
  const Dataset data = make_dataset("synthetic", synthetic_corpus(opts));
  BranchNet net = init_branch_net({}, seed);
  net.scaler = InputScaler::fit(data.features);
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.learning_rate = 0.05;
  cfg.weight_decay = 1e-3;
  cfg.epochs = 20;
  net = train_siamese(std::span<const Dataset>(&data, 1), std::move(net), cfg);
  cfg.learning_rate = 0.01;
  cfg.epochs = 20;
  return finetune_mos(data, std::move(net), cfg);
}

BenchPipeline make_pipeline(const std::string& name, const PipelineConfig& config) {
  BenchPipeline p;
  p.name = name;
  if (name == "identity") {
    p.steps = {{"identity", [](const VideoClip&, const std::any&) -> std::any { return 0.0; }}};
    return p;
  }

  p.steps = feature_steps(config.threads);
  p.descriptor = feature_descriptor(config.spec, reference_frames(config.spec));
  if (name == "features") {
    p.steps.push_back({"score", [](const VideoClip&, const std::any& fv) -> std::any {
                         return std::any_cast<const FeatureVector&>(fv)[Feature::kAvgLuminance];
                       }});
    return p;
  }

  if (name == "feature_forest") {
    ForestModel forest;
    if (config.model) {
      if (!std::holds_alternative<ForestModel>(*config.model)) throw Error("feature_forest needs a forest model");
      forest = std::get<ForestModel>(*config.model);
    } else {
      forest = reference_forest(config.seed, config.threads);
    }
    p.tree_nodes = forest.node_count();
    p.steps.push_back({"forest", [forest = std::move(forest)](const VideoClip&, const std::any& fv) -> std::any {
                         return forest.predict(std::any_cast<const FeatureVector&>(fv));
                       }});
    return p;
  }

  if (name == "branchnet") {
    BranchNet net;
    if (config.model) {
      if (!std::holds_alternative<BranchNet>(*config.model)) throw Error("branchnet needs a branch-net model");
      net = std::get<BranchNet>(*config.model);
    } else {
      net = reference_branch_net(config.seed, config.threads);
    }
    p.descriptor = branch_net_descriptor(net, config.spec);
    p.steps.push_back({"branchnet", [net = std::move(net)](const VideoClip&, const std::any& fv) -> std::any {
                         return forward(net, std::any_cast<const FeatureVector&>(fv)).final_score();
                       }});
    return p;
  }

  throw Error("unknown pipeline '" + name + "'");
}

}  // namespace vqa
