#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Inner loops of the signal features and resampler. Every kernel has a scalar
// reference and, on x86-64, an AVX2 variant; the active table is chosen once
// at startup from CPUID and can be pinned for testing.
//
// Float-producing kernels (sobel, laplacian, difference, lerp) use the same
// operation order in every variant and are bit-identical across ISAs.
// Double accumulations (moments, ssim columns) differ only in summation order.

namespace vqa::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

/// Count, mean and sum of squared deviations of a sample set.
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  double variance() const noexcept { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
  double stddev() const;

  /// Pairwise merge (Chan et al.); exact when either side is empty.
  static Moments merge(const Moments& a, const Moments& b) noexcept;
};

/// Per-column accumulators for one 4-row SSIM block strip.
struct SsimColumns {
  double* sum_a;
  double* sum_b;
  double* sum_aa;
  double* sum_bb;
  double* sum_ab;
};

struct KernelTable {
  Isa isa;

  // Two-pass mean / squared-deviation of the span.
  Moments (*moments)(std::span<const float> values);

  // Sobel gradient magnitude for the interior of a 3-row window.
  // Writes width-2 outputs for centre columns 1..width-2.
  void (*sobel_row)(const float* above, const float* row, const float* below, std::size_t width, float* out);

  // 4-neighbour Laplacian, same layout as sobel_row.
  void (*laplacian_row)(const float* above, const float* row, const float* below, std::size_t width, float* out);

  // out[i] = a[i] - b[i]
  void (*difference)(const float* a, const float* b, std::size_t n, float* out);

  // out[i] = r0[i] + w*(r1[i]-r0[i]), clamped between r0[i] and r1[i].
  void (*lerp)(const float* r0, const float* r1, float w, std::size_t n, float* out);

  // Adds a, b, a*a, b*b, a*b (in double) into the column accumulators.
  void (*accumulate_ssim_columns)(const float* a, const float* b, std::size_t n, const SsimColumns& cols);
};

const KernelTable& scalar_kernels();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

bool isa_available(Isa isa);
Isa best_available_isa();

/// The table used by the feature and sampling code.
const KernelTable& active_kernels();
Isa active_isa();
/// Pins the active table; throws vqa::Unsupported if the ISA is unavailable.
void set_active_isa(Isa isa);

}  // namespace vqa::simd
