#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vqa/bench.hpp"
#include "vqa/model_io.hpp"

namespace vqa {

struct PipelineConfig {
  int threads = 1;
  std::uint64_t seed = 0;
  // Model for the scoring pipelines; when absent one is trained on the
  // synthetic corpus during setup (outside any timed region).
  std::optional<Model> model;
  // Frame count and size of the clip the descriptor should describe.
  ClipSpec spec = kSpec30Fhd;
};

/// identity, features, feature_forest, branchnet
const std::vector<std::string>& pipeline_names();

/// Cost descriptor of the signal-feature stage over `frames` sampled frames.
PipelineDescriptor feature_descriptor(const ClipSpec& spec, std::int64_t frames);

BenchPipeline make_pipeline(const std::string& name, const PipelineConfig& config);

/// Forest trained on the default synthetic corpus; used as the reference model.
ForestModel reference_forest(std::uint64_t seed, int threads);
/// Branch net trained (siamese then fine-tune) on the default synthetic corpus.
BranchNet reference_branch_net(std::uint64_t seed, int threads);

}  // namespace vqa
