#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqa/clip_io.hpp"
#include "vqa/features.hpp"
#include "vqa/training.hpp"

namespace vqa {

/// Distortion knobs for one generated clip.
struct DistortionParams {
  int blur_passes = 0;      // 3x3 box blur repetitions
  double noise_sigma = 0.0;  // per-pixel, per-frame Gaussian
  double contrast = 1.0;     // gain around mid-grey
  double brightness = 0.0;   // offset
  double motion = 0.0;       // pixels per frame
  double saturation = 0.1;   // chroma amplitude
};

DistortionParams random_distortion(std::uint64_t seed);

/// Small textured clip with the given distortions applied; 4:4:4 chroma.
VideoClip distorted_clip(int width, int height, int frames, const DistortionParams& params, std::uint64_t seed);

struct CorpusOptions {
  int clips = 400;
  int width = 48;
  int height = 48;
  int frames = 5;
  double mos_noise = 0.05;  // as a fraction of the [1,5] range
  std::uint64_t seed = 1;
  int threads = 1;
};

struct CorpusItem {
  std::string clip_id;
  DistortionParams params;
  FeatureVector features;
  double latent = 0.0;  // noise-free quality before the squashing map
  double mos = 0.0;     // on [1,5]
};

/// MOS = 1 + 4 * logistic(latent) + noise, latent a fixed increasing
/// function of standardized log-sharpness and contrast and a decreasing
/// function of standardized TI. Features use every frame.
std::vector<CorpusItem> synthetic_corpus(const CorpusOptions& options = {});

/// Maps MOS from [1,5] onto [lo,hi] (affine, increasing).
double rescale_mos(double mos, double lo, double hi);

Dataset make_dataset(const std::string& name, const std::vector<CorpusItem>& items, double lo = 1.0,
                     double hi = 5.0);

}  // namespace vqa
