#include "vqa/bench.hpp"

#include <chrono>
#include <cstdio>
#include <initializer_list>

#include <json.hpp>

#include "vqa/error.hpp"

namespace vqa {

namespace {

std::int64_t checked_product(std::initializer_list<std::int64_t> factors) {
  std::int64_t out = 1;
  for (std::int64_t f : factors) {
    if (f <= 0) throw Error("stage dimensions must be positive");
    if (__builtin_mul_overflow(out, f, &out)) throw Error("MAC count overflows 64 bits");
  }
  return out;
}

std::int64_t feature_macs_per_pixel(const std::string& name) {
  // 3x3 stencil passes
  if (name == "si" || name == "ti" || name == "ti_first" || name == "sharpness") return 9;
  // x*x, y*y, x*y per pixel
  if (name == "ssim_pair" || name == "ssim_first") return 3;
  // single-pass reductions
  if (name == "avg_luminance" || name == "contrast" || name == "colorfulness") return 1;
  throw Error("unknown feature stage '" + name + "'");
}

bool per_frame(const Stage& s) {
  return std::visit([](const auto& st) { return st.per_frame; }, s);
}

double elapsed_ms(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

template <typename F>
void run_guarded(std::size_t index, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    throw PipelineFailure(index, e.what());
  }
}

}  // namespace

std::int64_t stage_macs(const Stage& stage) {
  return std::visit(
      [](const auto& s) -> std::int64_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, stage::Resize>) {
          checked_product({s.w_in, s.h_in});
          return checked_product({4, s.w_out, s.h_out});
        } else if constexpr (std::is_same_v<T, stage::Conv2d>) {
          return checked_product({s.c_in, s.c_out, s.k_h, s.k_w, s.h_out, s.w_out});
        } else if constexpr (std::is_same_v<T, stage::Linear>) {
          return checked_product({s.d_in, s.d_out, s.tokens});
        } else if constexpr (std::is_same_v<T, stage::Elementwise>) {
          return checked_product({s.n});
        } else {
          return checked_product({feature_macs_per_pixel(s.name), s.plane_size});
        }
      },
      stage);
}

std::int64_t stage_params(const Stage& stage) {
  if (const auto* c = std::get_if<stage::Conv2d>(&stage)) return checked_product({c->c_in, c->c_out, c->k_h, c->k_w}) + c->c_out;
  if (const auto* l = std::get_if<stage::Linear>(&stage)) return checked_product({l->d_in, l->d_out}) + l->d_out;
  return 0;
}

std::int64_t count_macs_raw(const PipelineDescriptor& d) {
  if (d.frames_per_clip <= 0) throw Error("frames_per_clip must be positive");
  std::int64_t total = 0;
  for (const auto& s : d.stages) {
    std::int64_t m = stage_macs(s);
    if (per_frame(s) && __builtin_mul_overflow(m, d.frames_per_clip, &m)) throw Error("MAC count overflows 64 bits");
    if (__builtin_add_overflow(total, m, &total)) throw Error("MAC count overflows 64 bits");
  }
  return total;
}

double count_macs(const PipelineDescriptor& d) { return static_cast<double>(count_macs_raw(d)) / 1e9; }

std::int64_t count_params_raw(const PipelineDescriptor& d) {
  std::int64_t total = 0;
  for (const auto& s : d.stages) total += stage_params(s);
  return total;
}

double count_params(const PipelineDescriptor& d) { return static_cast<double>(count_params_raw(d)) / 1e6; }

double BenchPipeline::operator()(const VideoClip& clip) const {
  if (steps.empty()) throw Error("pipeline '" + name + "' has no steps");
  std::any carry;
  for (const auto& step : steps) carry = step.run(clip, carry);
  return std::any_cast<double>(carry);
}

BenchReport time_pipeline(const ClipScorer& scorer, const VideoClip& clip, const std::string& spec_label,
                          const BenchOptions& options) {
  if (options.runs < 1) throw Error("at least one timed run is required");
  if (options.warmup < 0) throw Error("warmup count must be non-negative");
  BenchReport report;
  report.spec = spec_label;
  report.warmup_runs = options.warmup;

  std::size_t index = 0;
  for (int w = 0; w < options.warmup; ++w, ++index) {
    run_guarded(index, [&] { (void)scorer(clip); });
  }
  report.runs_ms.reserve(static_cast<std::size_t>(options.runs));
  for (int r = 0; r < options.runs; ++r, ++index) {
    run_guarded(index, [&] {
      const auto t0 = std::chrono::steady_clock::now();
      volatile double sink = scorer(clip);
      const auto t1 = std::chrono::steady_clock::now();
      (void)sink;
      report.runs_ms.push_back(elapsed_ms(t0, t1));
    });
  }
  double sum = 0.0;
  for (double v : report.runs_ms) sum += v;
  report.runtime_ms = sum / static_cast<double>(report.runs_ms.size());
  return report;
}

BenchReport time_pipeline(const BenchPipeline& pipeline, const VideoClip& clip, const std::string& spec_label,
                          const BenchOptions& options) {
  BenchReport report = time_pipeline([&](const VideoClip& c) { return pipeline(c); }, clip, spec_label, options);
  report.pipeline = pipeline.name;
  report.macs_g = count_macs(pipeline.descriptor);
  report.params_m = count_params(pipeline.descriptor);
  report.tree_nodes = pipeline.tree_nodes;
  return report;
}

std::vector<StageTiming> time_stages(const BenchPipeline& pipeline, const VideoClip& clip,
                                     const BenchOptions& options) {
  if (options.runs < 1) throw Error("at least one timed run is required");
  std::vector<StageTiming> out;
  for (const auto& step : pipeline.steps) out.push_back({step.name, 0.0});

  std::size_t index = 0;
  for (int r = 0; r < options.warmup + options.runs; ++r, ++index) {
    const bool timed = r >= options.warmup;
    run_guarded(index, [&] {
      std::any carry;
      for (std::size_t s = 0; s < pipeline.steps.size(); ++s) {
        const auto t0 = std::chrono::steady_clock::now();
        carry = pipeline.steps[s].run(clip, carry);
        const auto t1 = std::chrono::steady_clock::now();
        if (timed) out[s].mean_ms += elapsed_ms(t0, t1);
      }
    });
  }
  for (auto& t : out) t.mean_ms /= options.runs;
  return out;
}

Verdict check_constraint(const BenchReport& report, const ConstraintGate& gate) {
  if (!(gate.budget_ms > 0.0)) throw Error("budget must be positive");
  if (report.spec != gate.spec) throw SpecMismatch("report is for " + report.spec + ", gate is for " + gate.spec);
  return {report.runtime_ms <= gate.budget_ms, gate.budget_ms - report.runtime_ms};
}

void apply_constraint(BenchReport& report, const ConstraintGate& gate) {
  const Verdict v = check_constraint(report, gate);
  report.pass = v.pass;
  report.margin_ms = v.margin_ms;
  report.budget_ms = gate.budget_ms;
}

std::string bench_report_to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["spec"] = r.spec;
  j["pipeline"] = r.pipeline;
  j["runtime_ms"] = r.runtime_ms;
  j["runs"] = r.runs_ms;
  j["warmup_runs"] = r.warmup_runs;
  j["macs_g"] = r.macs_g;
  j["params_m"] = r.params_m;
  j["tree_nodes"] = r.tree_nodes;
  if (r.budget_ms) j["budget_ms"] = *r.budget_ms;
  if (r.margin_ms) j["margin_ms"] = *r.margin_ms;
  if (r.pass) j["pass"] = *r.pass;
  return j.dump(2);
}

std::string bench_report_csv_header() { return "spec,pipeline,runtime_ms,macs_g,params_m,tree_nodes,pass"; }

std::string bench_report_csv_row(const BenchReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%.3f,%.6f,%.6f,%zu,%s", r.spec.c_str(), r.pipeline.c_str(), r.runtime_ms,
                r.macs_g, r.params_m, r.tree_nodes, r.pass ? (*r.pass ? "true" : "false") : "");
  return buf;
}

}  // namespace vqa
