// Compiled with -mavx2 only; never called unless CPUID reports AVX2.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "vqa/simd/kernels.hpp"

namespace vqa::simd {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

Moments moments_avx2(std::span<const float> values) {
  Moments m;
  const std::size_t n = values.size();
  m.count = static_cast<std::int64_t>(n);
  if (n == 0) return m;
  const float* p = values.data();

  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(p + i);
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(v)));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)));
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += p[i];
  m.mean = sum / static_cast<double>(n);

  const __m256d mean = _mm256_set1_pd(m.mean);
  acc0 = _mm256_setzero_pd();
  acc1 = _mm256_setzero_pd();
  i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(p + i);
    const __m256d d0 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(v)), mean);
    const __m256d d1 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)), mean);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  double m2 = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = static_cast<double>(p[i]) - m.mean;
    m2 += d * d;
  }
  m.m2 = m2;
  return m;
}

void sobel_row_avx2(const float* above, const float* row, const float* below, std::size_t width, float* out) {
  if (width < 3) return;
  const std::size_t last = width - 1;  // exclusive upper bound on centre x
  const __m256 two = _mm256_set1_ps(2.0f);
  std::size_t x = 1;
  for (; x + 8 <= last; x += 8) {
    const __m256 al = _mm256_loadu_ps(above + x - 1);
    const __m256 ac = _mm256_loadu_ps(above + x);
    const __m256 ar = _mm256_loadu_ps(above + x + 1);
    const __m256 rl = _mm256_loadu_ps(row + x - 1);
    const __m256 rr = _mm256_loadu_ps(row + x + 1);
    const __m256 bl = _mm256_loadu_ps(below + x - 1);
    const __m256 bc = _mm256_loadu_ps(below + x);
    const __m256 br = _mm256_loadu_ps(below + x + 1);
    const __m256 left = _mm256_add_ps(_mm256_add_ps(al, bl), _mm256_mul_ps(two, rl));
    const __m256 right = _mm256_add_ps(_mm256_add_ps(ar, br), _mm256_mul_ps(two, rr));
    const __m256 top = _mm256_add_ps(_mm256_add_ps(al, ar), _mm256_mul_ps(two, ac));
    const __m256 bottom = _mm256_add_ps(_mm256_add_ps(bl, br), _mm256_mul_ps(two, bc));
    const __m256 gx = _mm256_sub_ps(right, left);
    const __m256 gy = _mm256_sub_ps(bottom, top);
    const __m256 mag = _mm256_sqrt_ps(_mm256_add_ps(_mm256_mul_ps(gx, gx), _mm256_mul_ps(gy, gy)));
    _mm256_storeu_ps(out + x - 1, mag);
  }
  for (; x < last; ++x) {
    const float left = (above[x - 1] + below[x - 1]) + 2.0f * row[x - 1];
    const float right = (above[x + 1] + below[x + 1]) + 2.0f * row[x + 1];
    const float top = (above[x - 1] + above[x + 1]) + 2.0f * above[x];
    const float bottom = (below[x - 1] + below[x + 1]) + 2.0f * below[x];
    const float gx = right - left;
    const float gy = bottom - top;
    out[x - 1] = std::sqrt(gx * gx + gy * gy);
  }
}

void laplacian_row_avx2(const float* above, const float* row, const float* below, std::size_t width, float* out) {
  if (width < 3) return;
  const std::size_t last = width - 1;
  const __m256 four = _mm256_set1_ps(4.0f);
  std::size_t x = 1;
  for (; x + 8 <= last; x += 8) {
    const __m256 vert = _mm256_add_ps(_mm256_loadu_ps(above + x), _mm256_loadu_ps(below + x));
    const __m256 horiz = _mm256_add_ps(_mm256_loadu_ps(row + x - 1), _mm256_loadu_ps(row + x + 1));
    const __m256 centre = _mm256_mul_ps(four, _mm256_loadu_ps(row + x));
    _mm256_storeu_ps(out + x - 1, _mm256_sub_ps(_mm256_add_ps(vert, horiz), centre));
  }
  for (; x < last; ++x) {
    out[x - 1] = ((above[x] + below[x]) + (row[x - 1] + row[x + 1])) - 4.0f * row[x];
  }
}

void difference_avx2(const float* a, const float* b, std::size_t n, float* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void lerp_avx2(const float* r0, const float* r1, float w, std::size_t n, float* out) {
  const __m256 vw = _mm256_set1_ps(w);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 a = _mm256_loadu_ps(r0 + i);
    const __m256 b = _mm256_loadu_ps(r1 + i);
    const __m256 v = _mm256_add_ps(a, _mm256_mul_ps(vw, _mm256_sub_ps(b, a)));
    const __m256 lo = _mm256_min_ps(a, b);
    const __m256 hi = _mm256_max_ps(a, b);
    _mm256_storeu_ps(out + i, _mm256_min_ps(_mm256_max_ps(v, lo), hi));
  }
  for (; i < n; ++i) {
    const float v = r0[i] + w * (r1[i] - r0[i]);
    const float lo = std::min(r0[i], r1[i]);
    const float hi = std::max(r0[i], r1[i]);
    out[i] = std::min(std::max(v, lo), hi);
  }
}

void accumulate_ssim_columns_avx2(const float* a, const float* b, std::size_t n, const SsimColumns& cols) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_cvtps_pd(_mm_loadu_ps(a + i));
    const __m256d vb = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
    _mm256_storeu_pd(cols.sum_a + i, _mm256_add_pd(_mm256_loadu_pd(cols.sum_a + i), va));
    _mm256_storeu_pd(cols.sum_b + i, _mm256_add_pd(_mm256_loadu_pd(cols.sum_b + i), vb));
    _mm256_storeu_pd(cols.sum_aa + i, _mm256_add_pd(_mm256_loadu_pd(cols.sum_aa + i), _mm256_mul_pd(va, va)));
    _mm256_storeu_pd(cols.sum_bb + i, _mm256_add_pd(_mm256_loadu_pd(cols.sum_bb + i), _mm256_mul_pd(vb, vb)));
    _mm256_storeu_pd(cols.sum_ab + i, _mm256_add_pd(_mm256_loadu_pd(cols.sum_ab + i), _mm256_mul_pd(va, vb)));
  }
  for (; i < n; ++i) {
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

const KernelTable* avx2_kernels() {
  static const KernelTable table{Isa::kAvx2,       moments_avx2,     sobel_row_avx2,
                                 laplacian_row_avx2, difference_avx2, lerp_avx2,
                                 accumulate_ssim_columns_avx2};
  return &table;
}

}  // namespace vqa::simd
