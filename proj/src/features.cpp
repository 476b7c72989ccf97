#include "vqa/features.hpp"

#include <cmath>
#include <vector>

#include "vqa/error.hpp"
#include "vqa/parallel.hpp"
#include "vqa/simd/kernels.hpp"

namespace vqa {

namespace {

using simd::Moments;

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;
constexpr int kSsimBlock = 4;  // window 8 = two blocks, stride 4 = one block

void require_3x3(const Plane& p, const char* what) {
  if (p.width < 3 || p.height < 3) {
    throw PlaneTooSmall(std::string(what) + " needs at least 3x3, got " + std::to_string(p.width) + "x" +
                        std::to_string(p.height));
  }
}

void require_same_shape(const Plane& a, const Plane& b) {
  if (!a.same_shape(b)) {
    throw DimensionMismatch(std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                            std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

using RowKernel = void (*)(const float*, const float*, const float*, std::size_t, float*);

// Moments of a 3x3 stencil response over interior pixels, merged row by row.
Moments stencil_moments(const Plane& p, RowKernel kernel) {
  const auto& k = simd::active_kernels();
  std::vector<float> buf(static_cast<std::size_t>(p.width - 2));
  Moments total;
  for (int y = 1; y + 1 < p.height; ++y) {
    kernel(p.row(y - 1).data(), p.row(y).data(), p.row(y + 1).data(), static_cast<std::size_t>(p.width), buf.data());
    total = Moments::merge(total, k.moments(buf));
  }
  return total;
}

}  // namespace

double spatial_information(const Plane& luma) {
  require_3x3(luma, "spatial information");
  return stencil_moments(luma, simd::active_kernels().sobel_row).stddev();
}

double sharpness(const Plane& luma) {
  require_3x3(luma, "sharpness");
  return stencil_moments(luma, simd::active_kernels().laplacian_row).variance();
}

double temporal_information(const Plane& current, const Plane& previous) {
  require_same_shape(current, previous);
  if (current.empty()) throw EmptyInput("temporal information of empty planes");
  const auto& k = simd::active_kernels();
  std::vector<float> diff(static_cast<std::size_t>(current.width));
  Moments total;
  for (int y = 0; y < current.height; ++y) {
    k.difference(current.row(y).data(), previous.row(y).data(), diff.size(), diff.data());
    total = Moments::merge(total, k.moments(diff));
  }
  return total.stddev();
}

double average_luminance(const Plane& luma) {
  if (luma.empty()) throw EmptyInput("average luminance of an empty plane");
  return simd::active_kernels().moments(luma.data).mean;
}

double contrast(const Plane& luma) {
  if (luma.empty()) throw EmptyInput("contrast of an empty plane");
  return simd::active_kernels().moments(luma.data).stddev();
}

Colorfulness colorfulness(const RgbPlanes& rgb) {
  require_same_shape(rgb.r, rgb.g);
  require_same_shape(rgb.r, rgb.b);
  if (rgb.r.empty()) throw EmptyInput("colorfulness of an empty frame");
  const auto& k = simd::active_kernels();
  const auto w = static_cast<std::size_t>(rgb.r.width);
  std::vector<float> rg(w);
  std::vector<float> yb(w);
  Moments rg_m;
  Moments yb_m;
  for (int y = 0; y < rgb.r.height; ++y) {
    const auto r = rgb.r.row(y);
    const auto g = rgb.g.row(y);
    const auto b = rgb.b.row(y);
    k.difference(r.data(), g.data(), w, rg.data());
    for (std::size_t x = 0; x < w; ++x) yb[x] = 0.5f * (r[x] + g[x]) - b[x];
    rg_m = Moments::merge(rg_m, k.moments(rg));
    yb_m = Moments::merge(yb_m, k.moments(yb));
  }
  const double spread = std::sqrt(rg_m.variance() + yb_m.variance());
  const double offset = std::sqrt(rg_m.mean * rg_m.mean + yb_m.mean * yb_m.mean);
  return {spread + 0.3 * offset, false};
}

Colorfulness colorfulness(const Frame& frame) {
  if (!frame.has_chroma()) return {0.0, true};
  return colorfulness(frame.to_rgb());
}

double ssim(const Plane& a, const Plane& b) {
  require_same_shape(a, b);
  if (a.width < 8 || a.height < 8) {
    throw PlaneTooSmall("ssim needs at least 8x8, got " + std::to_string(a.width) + "x" + std::to_string(a.height));
  }
  const auto& k = simd::active_kernels();
  const int bw = a.width / kSsimBlock;
  const int bh = a.height / kSsimBlock;
  const auto cols = static_cast<std::size_t>(bw) * kSsimBlock;
  const auto blocks = static_cast<std::size_t>(bw) * bh;

  // Block sums: [0] a, [1] b, [2] aa, [3] bb, [4] ab.
  std::array<std::vector<double>, 5> block;
  for (auto& v : block) v.assign(blocks, 0.0);
  std::array<std::vector<double>, 5> col;
  for (int by = 0; by < bh; ++by) {
    for (auto& v : col) v.assign(cols, 0.0);
    const simd::SsimColumns acc{col[0].data(), col[1].data(), col[2].data(), col[3].data(), col[4].data()};
    for (int r = 0; r < kSsimBlock; ++r) {
      const int y = by * kSsimBlock + r;
      k.accumulate_ssim_columns(a.row(y).data(), b.row(y).data(), cols, acc);
    }
    for (int bx = 0; bx < bw; ++bx) {
      const auto cell = static_cast<std::size_t>(by) * bw + bx;
      for (std::size_t s = 0; s < 5; ++s) {
        const double* c = col[s].data() + static_cast<std::size_t>(bx) * kSsimBlock;
        block[s][cell] = (c[0] + c[1]) + (c[2] + c[3]);
      }
    }
  }

  constexpr double n = 64.0;
  double total = 0.0;
  for (int wy = 0; wy + 1 < bh; ++wy) {
    for (int wx = 0; wx + 1 < bw; ++wx) {
      const auto c00 = static_cast<std::size_t>(wy) * bw + wx;
      const auto c10 = c00 + static_cast<std::size_t>(bw);
      double s[5];
      for (std::size_t i = 0; i < 5; ++i) {
        s[i] = (block[i][c00] + block[i][c00 + 1]) + (block[i][c10] + block[i][c10 + 1]);
      }
      const double mu_a = s[0] / n;
      const double mu_b = s[1] / n;
      const double var_a = s[2] / n - mu_a * mu_a;
      const double var_b = s[3] / n - mu_b * mu_b;
      const double cov = s[4] / n - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + kSsimC1) * (2.0 * cov + kSsimC2)) /
               ((mu_a * mu_a + mu_b * mu_b + kSsimC1) * (var_a + var_b + kSsimC2));
    }
  }
  return total / (static_cast<double>(bw - 1) * (bh - 1));
}

// Clip-level ---------------------------------------------------------------------

namespace {

struct FrameTerms {
  double si = 0, colorfulness = 0, luminance = 0, sharpness = 0, contrast = 0;
  double ti = 0, ti_first = 0, ssim_pair = 0, ssim_first = 0;
  bool degraded = false;
};

}  // namespace

FeatureVector extract_view_features(const SampledView& view, int threads) {
  const std::size_t n = view.frames.size();
  if (n == 0) throw EmptyInput("no frames to extract features from");

  std::vector<FrameTerms> terms(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const ViewFrame& f = view.frames[i];
    FrameTerms& t = terms[i];
    t.si = spatial_information(f.luma);
    t.sharpness = sharpness(f.luma);
    t.luminance = average_luminance(f.luma);
    t.contrast = contrast(f.luma);
    if (f.rgb) {
      t.colorfulness = colorfulness(*f.rgb).value;
    } else {
      t.degraded = true;
    }
    if (i > 0) {
      const Plane& prev = view.frames[i - 1].luma;
      const Plane& first = view.frames[0].luma;
      t.ti = temporal_information(f.luma, prev);
      t.ti_first = temporal_information(f.luma, first);
      t.ssim_pair = ssim(f.luma, prev);
      t.ssim_first = ssim(f.luma, first);
    }
  });

  // Running means: k identical frames reproduce the single-frame value exactly.
  FeatureVector fv;
  std::array<double, kFeatureCount> frame_mean{};
  std::array<double, kFeatureCount> pair_mean{};
  for (std::size_t i = 0; i < n; ++i) {
    const FrameTerms& t = terms[i];
    fv.degraded = fv.degraded || t.degraded;
    const double frame_vals[] = {t.si, t.colorfulness, t.luminance, t.sharpness, t.contrast};
    for (std::size_t s = 0; s < 5; ++s) frame_mean[s] += (frame_vals[s] - frame_mean[s]) / static_cast<double>(i + 1);
    if (i > 0) {
      const double pair_vals[] = {t.ti, t.ti_first, t.ssim_pair, t.ssim_first};
      for (std::size_t s = 0; s < 4; ++s) pair_mean[s] += (pair_vals[s] - pair_mean[s]) / static_cast<double>(i);
    }
  }
  fv[Feature::kSi] = frame_mean[0];
  fv[Feature::kColorfulness] = fv.degraded ? 0.0 : frame_mean[1];
  fv[Feature::kAvgLuminance] = frame_mean[2];
  fv[Feature::kSharpness] = frame_mean[3];
  fv[Feature::kContrast] = frame_mean[4];
  fv.single_frame = n == 1;
  fv[Feature::kTi] = pair_mean[0];
  fv[Feature::kTiFirst] = pair_mean[1];
  fv[Feature::kSsimPair] = pair_mean[2];
  fv[Feature::kSsimFirst] = pair_mean[3];
  return fv;
}

FeatureVector extract_clip_features(const VideoClip& clip, const TemporalPlan& plan, int threads) {
  return extract_view_features(make_view(clip, plan, transform::Identity{}, true, threads), threads);
}

}  // namespace vqa
