#include "dfn/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace dfn::simd {
namespace {

float dot_neon(const float* a, const float* b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
  }
  float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(float alpha, const float* x, float* y, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(float alpha, float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(x + i, vmulq_n_f32(vld1q_f32(x + i), alpha));
  for (; i < n; ++i) x[i] *= alpha;
}

float sum_squares_neon(const float* x, std::size_t n) { return dot_neon(x, x, n); }

void gemv_neon(const float* w, std::size_t rows, std::size_t cols,
               const float* x, const float* b, float* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    float acc = dot_neon(w + r * cols, x, cols);
    out[r] = b ? acc + b[r] : acc;
  }
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{"neon", dot_neon, axpy_neon, scale_neon,
                                 sum_squares_neon, gemv_neon};
  return &table;
}

}  // namespace dfn::simd

#else

namespace dfn::simd {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace dfn::simd

#endif
