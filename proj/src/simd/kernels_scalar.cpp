#include <algorithm>
#include <cmath>

#include "vqa/simd/kernels.hpp"

namespace vqa::simd {

namespace {

Moments moments_scalar(std::span<const float> values) {
  Moments m;
  m.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return m;
  double sum = 0.0;
  for (const float v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  double m2 = 0.0;
  for (const float v : values) {
    const double d = static_cast<double>(v) - m.mean;
    m2 += d * d;
  }
  m.m2 = m2;
  return m;
}

void sobel_row_scalar(const float* above, const float* row, const float* below, std::size_t width, float* out) {
  for (std::size_t x = 1; x + 1 < width; ++x) {
    const float left = (above[x - 1] + below[x - 1]) + 2.0f * row[x - 1];
    const float right = (above[x + 1] + below[x + 1]) + 2.0f * row[x + 1];
    const float top = (above[x - 1] + above[x + 1]) + 2.0f * above[x];
    const float bottom = (below[x - 1] + below[x + 1]) + 2.0f * below[x];
    const float gx = right - left;
    const float gy = bottom - top;
    out[x - 1] = std::sqrt(gx * gx + gy * gy);
  }
}

void laplacian_row_scalar(const float* above, const float* row, const float* below, std::size_t width, float* out) {
  for (std::size_t x = 1; x + 1 < width; ++x) {
    out[x - 1] = ((above[x] + below[x]) + (row[x - 1] + row[x + 1])) - 4.0f * row[x];
  }
}

void difference_scalar(const float* a, const float* b, std::size_t n, float* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void lerp_scalar(const float* r0, const float* r1, float w, std::size_t n, float* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const float v = r0[i] + w * (r1[i] - r0[i]);
    const float lo = std::min(r0[i], r1[i]);
    const float hi = std::max(r0[i], r1[i]);
    out[i] = std::min(std::max(v, lo), hi);
  }
}

void accumulate_ssim_columns_scalar(const float* a, const float* b, std::size_t n, const SsimColumns& cols) {
  for (std::size_t i = 0; i < n; ++i) {
    const double va = a[i];
    const double vb = b[i];
    cols.sum_a[i] += va;
    cols.sum_b[i] += vb;
    cols.sum_aa[i] += va * va;
    cols.sum_bb[i] += vb * vb;
    cols.sum_ab[i] += va * vb;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::kScalar,       moments_scalar,     sobel_row_scalar,
                                 laplacian_row_scalar, difference_scalar, lerp_scalar,
                                 accumulate_ssim_columns_scalar};
  return table;
}

}  // namespace vqa::simd
