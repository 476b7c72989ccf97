#include "vqa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "vqa/error.hpp"
#include "vqa/parallel.hpp"
#include "vqa/sampling.hpp"

namespace vqa {

namespace {

void box_blur(Plane& p) {
  Plane out(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      float acc = 0.0f;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          acc += p.at(std::clamp(x + dx, 0, p.width - 1), std::clamp(y + dy, 0, p.height - 1));
        }
      }
      out.at(x, y) = acc / 9.0f;
    }
  }
  p = std::move(out);
}

struct Wave {
  double fx, fy, phase, amp;
};

}  // namespace

DistortionParams random_distortion(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DistortionParams p;
  p.blur_passes = std::uniform_int_distribution<int>(0, 4)(rng);
  p.noise_sigma = 0.06 * u(rng) * u(rng);
  p.contrast = 0.3 + 1.1 * u(rng);
  p.brightness = -0.15 + 0.3 * u(rng);
  p.motion = 4.0 * u(rng);
  p.saturation = 0.2 * u(rng);
  return p;
}

VideoClip distorted_clip(int width, int height, int frames, const DistortionParams& params, std::uint64_t seed) {
  if (width < 1 || height < 1 || frames < 1) throw Error("clip dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Wave> waves(6);
  for (auto& w : waves) w = {1.0 + 7.0 * u(rng), 1.0 + 7.0 * u(rng), 2.0 * std::numbers::pi * u(rng), 0.05 + 0.1 * u(rng)};
  const Wave chroma_b{1.0 + 2.0 * u(rng), 1.0 + 2.0 * u(rng), 2.0 * std::numbers::pi * u(rng), 1.0};
  const Wave chroma_r{1.0 + 2.0 * u(rng), 1.0 + 2.0 * u(rng), 2.0 * std::numbers::pi * u(rng), 1.0};
  std::normal_distribution<double> noise(0.0, 1.0);

  auto eval = [&](const Wave& w, double x, double y) {
    return w.amp * std::sin(2.0 * std::numbers::pi * (w.fx * x / width + w.fy * y / height) + w.phase);
  };

  std::vector<Frame> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const double shift = params.motion * t;
    Plane luma(width, height);
    Plane cb(width, height);
    Plane cr(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const auto& w : waves) v += eval(w, x + shift, y);
        luma.at(x, y) = static_cast<float>(0.5 + params.contrast * v + params.brightness);
        cb.at(x, y) = static_cast<float>(std::clamp(0.5 + params.saturation * eval(chroma_b, x + shift, y), 0.0, 1.0));
        cr.at(x, y) = static_cast<float>(std::clamp(0.5 + params.saturation * eval(chroma_r, x + shift, y), 0.0, 1.0));
      }
    }
    for (int b = 0; b < params.blur_passes; ++b) box_blur(luma);
    for (float& s : luma.data) {
      s = static_cast<float>(std::clamp(static_cast<double>(s) + params.noise_sigma * noise(rng), 0.0, 1.0));
    }
    out.emplace_back(std::move(luma), ChromaPlanes{std::move(cb), std::move(cr)}, 8);
  }
  return VideoClip(std::move(out), Fps{30, 1}, ChromaLayout::k444);
}

std::vector<CorpusItem> synthetic_corpus(const CorpusOptions& options) {
  if (options.clips < 2) throw EmptyInput("corpus needs at least two clips");
  const auto n = static_cast<std::size_t>(options.clips);
  std::vector<CorpusItem> items(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const std::uint64_t clip_seed = options.seed * 1000003ULL + i;
    CorpusItem& item = items[i];
    item.clip_id = "syn" + std::to_string(i);
    item.params = random_distortion(clip_seed);
    const VideoClip clip = distorted_clip(options.width, options.height, options.frames, item.params, clip_seed ^ 0x5bd1e995ULL);
    item.features = extract_clip_features(clip, temporal_sample(clip, TemporalMode::kAll));
  });

  auto standardized = [&](auto get) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = get(items[i].features);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (double& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
    return v;
  };
  const auto z_sharp = standardized([](const FeatureVector& f) { return std::log(f[Feature::kSharpness] + 1e-6); });
  const auto z_contrast = standardized([](const FeatureVector& f) { return f[Feature::kContrast]; });
  const auto z_ti = standardized([](const FeatureVector& f) { return f[Feature::kTi]; });

  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 4.0 * options.mos_noise);
  for (std::size_t i = 0; i < n; ++i) {
    items[i].latent = 1.0 * z_sharp[i] + 0.6 * z_contrast[i] - 0.6 * z_ti[i];
    const double clean = 1.0 + 4.0 / (1.0 + std::exp(-items[i].latent));
    items[i].mos = std::clamp(clean + noise(rng), 1.0, 5.0);
  }
  return items;
}

double rescale_mos(double mos, double lo, double hi) { return lo + (mos - 1.0) * (hi - lo) / 4.0; }

Dataset make_dataset(const std::string& name, const std::vector<CorpusItem>& items, double lo, double hi) {
  Dataset d;
  d.name = name;
  for (const auto& item : items) {
    d.features.push_back(item.features);
    d.mos.push_back(rescale_mos(item.mos, lo, hi));
  }
  return d;
}

}  // namespace vqa
