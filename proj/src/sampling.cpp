#include "vqa/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include <json.hpp>

#include "vqa/error.hpp"
#include "vqa/parallel.hpp"
#include "vqa/simd/kernels.hpp"

namespace vqa {

namespace {

constexpr int kBlock = 30;

struct ModeName {
  TemporalMode mode;
  std::string_view name;
};

constexpr ModeName kModeNames[] = {
    {TemporalMode::kOnePer30, "one_per_30"}, {TemporalMode::kTwoPer30, "two_per_30"},
    {TemporalMode::kOneFps, "one_fps"},      {TemporalMode::kFiveFps, "five_fps"},
    {TemporalMode::kAll, "all"},             {TemporalMode::kFrankenstoneReduce, "frankenstone_reduce"},
};

// First frame whose timestamp is at or after k/rate seconds, for rate
// samples per second: ceil(k * num / (rate * den)).
std::vector<int> per_second(std::size_t n, Fps fps, std::int64_t rate) {
  std::vector<int> out;
  const std::int64_t den = rate * fps.den;
  for (std::int64_t k = 0;; ++k) {
    const std::int64_t idx = (k * fps.num + den - 1) / den;
    if (idx >= static_cast<std::int64_t>(n)) break;
    if (out.empty() || idx > out.back()) out.push_back(static_cast<int>(idx));
  }
  return out;
}

}  // namespace

std::string_view temporal_mode_name(TemporalMode mode) {
  for (const auto& m : kModeNames) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

TemporalMode parse_temporal_mode(std::string_view name) {
  for (const auto& m : kModeNames) {
    if (m.name == name) return m.mode;
  }
  throw Error("unknown temporal mode '" + std::string(name) + "'");
}

std::vector<int> frankenstone_subset(int sampled, int target) {
  if (target < 1) throw Error("frame subset target must be at least 1");
  if (sampled < target) {
    throw InsufficientFrames("need at least " + std::to_string(target) + " sampled frames, got " +
                             std::to_string(sampled));
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(target));
  const double m = sampled;
  const double t = target;
  for (int j = 0; j < target; ++j) {
    const double frac = 1.0 - std::pow((t - j) / t, 1.5);
    auto idx = static_cast<int>(std::lround(m * frac));
    idx = std::min(idx, sampled - target + j);
    if (!out.empty() && idx <= out.back()) idx = out.back() + 1;
    out.push_back(idx);
  }
  return out;
}

TemporalPlan temporal_sample(std::size_t n, Fps fps, TemporalMode mode, int target) {
  if (n == 0) throw EmptyInput("cannot sample an empty clip");
  TemporalPlan plan{mode, {}};
  auto& idx = plan.indices;
  switch (mode) {
    case TemporalMode::kOnePer30:
      for (std::size_t i = 0; i < n; i += kBlock) idx.push_back(static_cast<int>(i));
      break;
    case TemporalMode::kTwoPer30:
      // Block start plus the block midpoint (15 for full blocks).
      for (std::size_t start = 0; start < n; start += kBlock) {
        const std::size_t len = std::min<std::size_t>(kBlock, n - start);
        idx.push_back(static_cast<int>(start));
        if (len >= 2) idx.push_back(static_cast<int>(start + len / 2));
      }
      break;
    case TemporalMode::kOneFps:
      idx = per_second(n, fps, 1);
      break;
    case TemporalMode::kFiveFps:
      idx = per_second(n, fps, 5);
      break;
    case TemporalMode::kAll:
      idx.resize(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
      break;
    case TemporalMode::kFrankenstoneReduce: {
      // 1 fps first; short clips fall back to denser plans.
      std::vector<int> base = per_second(n, fps, 1);
      if (static_cast<int>(base.size()) < target) base = per_second(n, fps, 5);
      if (static_cast<int>(base.size()) < target) base = temporal_sample(n, fps, TemporalMode::kAll).indices;
      const int t = std::min<int>(target, static_cast<int>(base.size()));
      for (const int k : frankenstone_subset(static_cast<int>(base.size()), t)) idx.push_back(base[k]);
      break;
    }
  }
  return plan;
}

TemporalPlan temporal_sample(const VideoClip& clip, TemporalMode mode, int target) {
  return temporal_sample(clip.frame_count(), clip.fps(), mode, target);
}

std::string temporal_plan_to_json(const TemporalPlan& plan) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(temporal_mode_name(plan.mode));
  j["indices"] = plan.indices;
  return j.dump();
}

// Spatial ----------------------------------------------------------------------

namespace {

struct Tap {
  int i0;
  int i1;
  float w;
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double src = std::clamp((o + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
    const int i0 = static_cast<int>(std::floor(src));
    taps[o] = {i0, std::min(i0 + 1, in - 1), static_cast<float>(src - i0)};
  }
  return taps;
}

}  // namespace

Plane resize_bilinear(const Plane& plane, int out_w, int out_h) {
  if (plane.width < 1 || plane.height < 1) throw Error("cannot resize an empty plane");
  if (out_w < 1 || out_h < 1) throw Error("resize target must be positive");
  if (out_w == plane.width && out_h == plane.height) return plane;

  const auto& k = simd::active_kernels();
  const auto xtaps = bilinear_taps(plane.width, out_w);
  const auto ytaps = bilinear_taps(plane.height, out_h);

  // Horizontal pass, only for the source rows the vertical pass reads.
  std::vector<char> needed(static_cast<std::size_t>(plane.height), 0);
  for (const Tap& t : ytaps) needed[t.i0] = needed[t.i1] = 1;
  Plane horiz(out_w, plane.height);
  for (int y = 0; y < plane.height; ++y) {
    if (!needed[y]) continue;
    const auto src = plane.row(y);
    auto dst = horiz.row(y);
    for (int x = 0; x < out_w; ++x) {
      const Tap& t = xtaps[x];
      k.lerp(&src[t.i0], &src[t.i1], t.w, 1, &dst[x]);
    }
  }

  Plane out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const Tap& t = ytaps[y];
    k.lerp(horiz.row(t.i0).data(), horiz.row(t.i1).data(), t.w, static_cast<std::size_t>(out_w), out.row(y).data());
  }
  return out;
}

Plane pad_to_square(const Plane& plane, float fill) {
  const int side = std::max(plane.width, plane.height);
  if (side == plane.width && side == plane.height) return plane;
  Plane out(side, side, fill);
  const int ox = (side - plane.width) / 2;
  const int oy = (side - plane.height) / 2;
  for (int y = 0; y < plane.height; ++y) {
    const auto src = plane.row(y);
    std::copy(src.begin(), src.end(), out.row(y + oy).begin() + ox);
  }
  return out;
}

FragmentLayout fragment_layout(int width, int height, const FragmentParams& params, std::uint64_t seed) {
  if (params.grid < 1 || params.patch < 1) throw Error("fragment grid and patch must be positive");
  const int need = params.grid * params.patch;
  if (width < need || height < need) {
    throw SourceTooSmall("fragment sampling needs at least " + std::to_string(need) + "x" + std::to_string(need) +
                         ", got " + std::to_string(width) + "x" + std::to_string(height));
  }
  const int region_w = width / params.grid;
  const int region_h = height / params.grid;
  FragmentLayout layout{params, {}, {}};
  const auto cells = static_cast<std::size_t>(params.grid) * params.grid;
  layout.x0.reserve(cells);
  layout.y0.reserve(cells);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < params.grid; ++i) {
    const int ry = i * region_h;
    const int rh = i == params.grid - 1 ? height - ry : region_h;
    for (int j = 0; j < params.grid; ++j) {
      const int rx = j * region_w;
      const int rw = j == params.grid - 1 ? width - rx : region_w;
      layout.x0.push_back(std::uniform_int_distribution<int>(rx, rx + rw - params.patch)(rng));
      layout.y0.push_back(std::uniform_int_distribution<int>(ry, ry + rh - params.patch)(rng));
    }
  }
  return layout;
}

Plane apply_fragment_layout(const Plane& plane, const FragmentLayout& layout) {
  const int grid = layout.params.grid;
  const int patch = layout.params.patch;
  Plane out(grid * patch, grid * patch);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const auto cell = static_cast<std::size_t>(i) * grid + j;
      const int sx = layout.x0[cell];
      const int sy = layout.y0[cell];
      for (int r = 0; r < patch; ++r) {
        const auto src = plane.row(sy + r).subspan(static_cast<std::size_t>(sx), static_cast<std::size_t>(patch));
        std::copy(src.begin(), src.end(), out.row(i * patch + r).begin() + j * patch);
      }
    }
  }
  return out;
}

Plane fragment_sample(const Plane& plane, const FragmentParams& params, std::uint64_t seed) {
  return apply_fragment_layout(plane, fragment_layout(plane.width, plane.height, params, seed));
}

namespace {

bool parse_pair(std::string_view s, int& a, int& b) {
  const auto x = s.find('x');
  if (x == std::string_view::npos) return false;
  auto ra = std::from_chars(s.data(), s.data() + x, a);
  auto rb = std::from_chars(s.data() + x + 1, s.data() + s.size(), b);
  return ra.ec == std::errc() && ra.ptr == s.data() + x && rb.ec == std::errc() && rb.ptr == s.data() + s.size() &&
         a > 0 && b > 0;
}

}  // namespace

SpatialTransform parse_spatial_transform(std::string_view text, std::uint64_t seed) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const auto bad = [&] { return Error("bad spatial transform '" + std::string(text) + "'"); };

  if (kind == "none" || kind == "identity") return transform::Identity{};
  if (kind == "resize") {
    transform::Resize r;
    if (!parse_pair(arg, r.width, r.height)) throw bad();
    return r;
  }
  if (kind == "pad_square") {
    transform::PadSquareResize p;
    const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), p.side);
    if (res.ec != std::errc() || res.ptr != arg.data() + arg.size() || p.side <= 0) throw bad();
    return p;
  }
  if (kind == "fragment") {
    transform::Fragment f;
    f.seed = seed;
    if (!arg.empty() && !parse_pair(arg, f.params.grid, f.params.patch)) throw bad();
    return f;
  }
  throw bad();
}

std::string spatial_transform_name(const SpatialTransform& t) {
  struct Visitor {
    std::string operator()(const transform::Identity&) const { return "none"; }
    std::string operator()(const transform::Resize& r) const {
      return "resize:" + std::to_string(r.width) + "x" + std::to_string(r.height);
    }
    std::string operator()(const transform::PadSquareResize& p) const { return "pad_square:" + std::to_string(p.side); }
    std::string operator()(const transform::Fragment& f) const {
      return "fragment:" + std::to_string(f.params.grid) + "x" + std::to_string(f.params.patch);
    }
  };
  return std::visit(Visitor{}, t);
}

SampledView make_view(const VideoClip& clip, const TemporalPlan& plan, const SpatialTransform& xform, bool with_rgb,
                      int threads) {
  for (std::size_t i = 0; i < plan.indices.size(); ++i) {
    const int idx = plan.indices[i];
    if (idx < 0 || static_cast<std::size_t>(idx) >= clip.frame_count() || (i > 0 && idx <= plan.indices[i - 1])) {
      throw Error("temporal plan is not valid for this clip");
    }
  }

  SampledView view;
  view.origin_indices = plan.indices;
  view.transform = xform;
  view.frames.resize(plan.indices.size());

  parallel_for(plan.indices.size(), threads, [&](std::size_t k) {
    const int origin = plan.indices[k];
    const Frame& frame = clip.frame(static_cast<std::size_t>(origin));
    std::optional<RgbPlanes> rgb;
    if (with_rgb && frame.has_chroma()) rgb = frame.to_rgb();

    auto apply = [&](const Plane& p, const std::optional<FragmentLayout>& layout) -> Plane {
      struct Visitor {
        const Plane& p;
        const std::optional<FragmentLayout>& layout;
        Plane operator()(const transform::Identity&) const { return p; }
        Plane operator()(const transform::Resize& r) const { return resize_bilinear(p, r.width, r.height); }
        Plane operator()(const transform::PadSquareResize& s) const {
          return resize_bilinear(pad_to_square(p), s.side, s.side);
        }
        Plane operator()(const transform::Fragment&) const { return apply_fragment_layout(p, *layout); }
      };
      return std::visit(Visitor{p, layout}, xform);
    };

    std::optional<FragmentLayout> layout;
    if (const auto* f = std::get_if<transform::Fragment>(&xform)) {
      layout = fragment_layout(clip.width(), clip.height(), f->params, f->seed ^ static_cast<std::uint64_t>(origin));
    }
    ViewFrame& out = view.frames[k];
    out.luma = apply(frame.luma(), layout);
    if (rgb) out.rgb = RgbPlanes{apply(rgb->r, layout), apply(rgb->g, layout), apply(rgb->b, layout)};
  });
  return view;
}

}  // namespace vqa
