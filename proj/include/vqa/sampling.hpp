#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vqa/clip_io.hpp"
#include "vqa/plane.hpp"

namespace vqa {

// Temporal -------------------------------------------------------------------

enum class TemporalMode { kOnePer30, kTwoPer30, kOneFps, kFiveFps, kAll, kFrankenstoneReduce };

std::string_view temporal_mode_name(TemporalMode mode);
TemporalMode parse_temporal_mode(std::string_view name);

struct TemporalPlan {
  TemporalMode mode = TemporalMode::kAll;
  std::vector<int> indices;
};

/// Pure function of (frame_count, fps, mode). `target` only matters for
/// kFrankenstoneReduce.
TemporalPlan temporal_sample(std::size_t frame_count, Fps fps, TemporalMode mode, int target = 5);
TemporalPlan temporal_sample(const VideoClip& clip, TemporalMode mode, int target = 5);

/// Picks `target` of `sampled` frame positions, denser toward the end:
/// i_j = round(m * (1 - ((t - j) / t)^1.5)), capped so the remaining picks
/// still fit, then shifted forward to stay strictly increasing.
/// Throws InsufficientFrames when sampled < target.
std::vector<int> frankenstone_subset(int sampled, int target = 5);

/// {"mode": "...", "indices": [...]}
std::string temporal_plan_to_json(const TemporalPlan& plan);

// Spatial --------------------------------------------------------------------

/// Separable bilinear with half-pixel centres and edge clamping.
Plane resize_bilinear(const Plane& plane, int out_w, int out_h);

/// Centres the plane on a max(w,h) square filled with `fill`.
Plane pad_to_square(const Plane& plane, float fill = 0.0f);

struct FragmentParams {
  int grid = 7;
  int patch = 32;
};

/// Top-left source coordinates of each grid cell's window, row-major.
struct FragmentLayout {
  FragmentParams params;
  std::vector<int> x0;
  std::vector<int> y0;
};

/// Region (i,j) spans an equal share of the frame, the last row/column
/// absorbing the remainder; the window is uniform inside its region.
FragmentLayout fragment_layout(int width, int height, const FragmentParams& params, std::uint64_t seed);
Plane apply_fragment_layout(const Plane& plane, const FragmentLayout& layout);
Plane fragment_sample(const Plane& plane, const FragmentParams& params, std::uint64_t seed);

namespace transform {
struct Identity {};
struct Resize {
  int width = 224;
  int height = 224;
};
struct PadSquareResize {
  int side = 448;
};
struct Fragment {
  FragmentParams params;
  std::uint64_t seed = 0;
};
}  // namespace transform

using SpatialTransform = std::variant<transform::Identity, transform::Resize, transform::PadSquareResize, transform::Fragment>;

/// Accepts "none", "resize:WxH", "pad_square:S", "fragment" or "fragment:GxP".
/// A fragment transform takes its seed from `seed`.
SpatialTransform parse_spatial_transform(std::string_view text, std::uint64_t seed = 0);
std::string spatial_transform_name(const SpatialTransform& t);

struct ViewFrame {
  Plane luma;
  std::optional<RgbPlanes> rgb;
};

struct SampledView {
  std::vector<ViewFrame> frames;
  std::vector<int> origin_indices;
  SpatialTransform transform;
};

/// Applies the plan and transform. RGB planes are produced only when
/// `with_rgb` is set and the clip carries chroma. Fragment randomness is
/// split per frame as seed ^ origin_index, so the thread count never
/// changes the output.
SampledView make_view(const VideoClip& clip, const TemporalPlan& plan, const SpatialTransform& transform,
                      bool with_rgb, int threads = 1);

}  // namespace vqa
