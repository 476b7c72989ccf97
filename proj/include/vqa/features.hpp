#pragma once

#include <array>
#include <string>
#include <string_view>

#include "vqa/clip_io.hpp"
#include "vqa/plane.hpp"
#include "vqa/sampling.hpp"

namespace vqa {

// Per-plane signal measures. All operate on normalized [0,1] samples and use
// population (1/N) statistics.

/// Stddev of the Sobel gradient magnitude over interior pixels. Needs >= 3x3.
double spatial_information(const Plane& luma);

/// Stddev of the pixelwise difference current - previous.
double temporal_information(const Plane& current, const Plane& previous);

struct Colorfulness {
  double value = 0.0;
  bool degraded = false;  // no chroma available
};

/// Hasler-Suesstrunk: sqrt(var_rg + var_yb) + 0.3 * sqrt(mean_rg^2 + mean_yb^2)
/// with rg = R - G and yb = (R + G)/2 - B.
Colorfulness colorfulness(const RgbPlanes& rgb);
Colorfulness colorfulness(const Frame& frame);

double average_luminance(const Plane& luma);
/// Variance of the 4-neighbour Laplacian over interior pixels. Needs >= 3x3.
double sharpness(const Plane& luma);
/// RMS contrast (stddev of luma).
double contrast(const Plane& luma);

/// Mean SSIM over 8x8 windows at stride 4, C1 = 0.01^2, C2 = 0.03^2.
double ssim(const Plane& a, const Plane& b);

// Clip-level vectors ------------------------------------------------------------

enum class Feature { kSi, kTi, kColorfulness, kAvgLuminance, kSharpness, kContrast, kTiFirst, kSsimPair, kSsimFirst };

inline constexpr std::size_t kFeatureCount = 9;

/// Declared column order for CSV/JSON.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "si", "ti", "colorfulness", "avg_luminance", "sharpness", "contrast", "ti_first", "ssim_pair", "ssim_first"};

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  bool degraded = false;      // colorfulness unavailable (grayscale source)
  bool single_frame = false;  // no frame pairs; temporal terms are 0

  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Branch families fed to the fusion network.
inline constexpr std::array<Feature, 4> kTechnicalFeatures = {Feature::kSi, Feature::kTi, Feature::kSharpness,
                                                               Feature::kSsimPair};
inline constexpr std::array<Feature, 4> kAestheticFeatures = {Feature::kColorfulness, Feature::kContrast,
                                                               Feature::kSharpness, Feature::kSsimFirst};
inline constexpr std::array<Feature, 3> kSemanticFeatures = {Feature::kAvgLuminance, Feature::kContrast,
                                                              Feature::kColorfulness};

/// Per-frame features averaged over the view's frames. ti/ssim_pair use
/// consecutive sampled frames, ti_first/ssim_first compare against the first
/// sampled frame. Frames are processed on up to `threads` workers and
/// reduced in frame order.
FeatureVector extract_view_features(const SampledView& view, int threads = 1);

/// Full-resolution features over the plan's frames.
FeatureVector extract_clip_features(const VideoClip& clip, const TemporalPlan& plan, int threads = 1);

}  // namespace vqa
