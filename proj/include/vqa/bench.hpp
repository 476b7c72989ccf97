#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vqa/clip_io.hpp"

namespace vqa {

// Cost model ----------------------------------------------------------------

namespace stage {
struct Resize {
  std::int64_t w_in, h_in, w_out, h_out;
  bool per_frame = true;
};
struct Conv2d {
  std::int64_t c_in, c_out, k_h, k_w, h_out, w_out;
  bool per_frame = true;
};
struct Linear {
  std::int64_t d_in, d_out, tokens;
  bool per_frame = true;
};
struct Elementwise {
  std::int64_t n;
  bool per_frame = true;
};
/// One of the signal features by name (si, ti, ti_first, sharpness, ...).
struct Feature {
  std::string name;
  std::int64_t plane_size;
  bool per_frame = true;
};
}  // namespace stage

using Stage = std::variant<stage::Resize, stage::Conv2d, stage::Linear, stage::Elementwise, stage::Feature>;

struct PipelineDescriptor {
  std::vector<Stage> stages;
  std::int64_t frames_per_clip = 1;
};

/// Multiply-accumulates per clip for one stage. Throws Error on
/// non-positive dimensions or an unknown feature name.
std::int64_t stage_macs(const Stage& stage);
std::int64_t stage_params(const Stage& stage);

std::int64_t count_macs_raw(const PipelineDescriptor& d);
double count_macs(const PipelineDescriptor& d);  // giga
std::int64_t count_params_raw(const PipelineDescriptor& d);
double count_params(const PipelineDescriptor& d);  // millions

// Timing ----------------------------------------------------------------------

struct BenchOptions {
  int warmup = 3;
  int runs = 10;
};

struct BenchReport {
  std::string spec;
  std::string pipeline;
  double runtime_ms = 0.0;  // mean of runs_ms
  std::vector<double> runs_ms;
  int warmup_runs = 0;
  double macs_g = 0.0;
  double params_m = 0.0;
  std::size_t tree_nodes = 0;
  std::optional<bool> pass;
  std::optional<double> margin_ms;
  std::optional<double> budget_ms;
};

using ClipScorer = std::function<double(const VideoClip&)>;

/// A named step; receives the previous step's output (empty for the first).
struct PipelineStep {
  std::string name;
  std::function<std::any(const VideoClip&, const std::any&)> run;
};

struct BenchPipeline {
  std::string name;
  PipelineDescriptor descriptor;
  std::vector<PipelineStep> steps;  // run in order; the last returns a double score
  std::size_t tree_nodes = 0;

  double operator()(const VideoClip& clip) const;
};

/// Untimed warmups, then timed runs on a steady clock, strictly sequential.
/// A throwing pipeline surfaces as PipelineFailure with a 0-based run
/// index counted across warmups and timed runs.
BenchReport time_pipeline(const BenchPipeline& pipeline, const VideoClip& clip, const std::string& spec_label,
                          const BenchOptions& options = {});
BenchReport time_pipeline(const ClipScorer& scorer, const VideoClip& clip, const std::string& spec_label,
                          const BenchOptions& options = {});

struct StageTiming {
  std::string name;
  double mean_ms = 0.0;
};

/// Per-step means from separate instrumented runs (never mixed into
/// time_pipeline's measurements).
std::vector<StageTiming> time_stages(const BenchPipeline& pipeline, const VideoClip& clip,
                                     const BenchOptions& options = {});

struct ConstraintGate {
  std::string spec = "30-FHD";
  double budget_ms = 1000.0;
};

struct Verdict {
  bool pass = false;
  double margin_ms = 0.0;
};

/// pass iff runtime <= budget. Throws SpecMismatch on differing specs.
Verdict check_constraint(const BenchReport& report, const ConstraintGate& gate);
/// Records the verdict in the report.
void apply_constraint(BenchReport& report, const ConstraintGate& gate);

std::string bench_report_to_json(const BenchReport& report);
std::string bench_report_csv_header();
std::string bench_report_csv_row(const BenchReport& report);

}  // namespace vqa
