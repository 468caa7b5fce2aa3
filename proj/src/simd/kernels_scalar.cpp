#include "dfn/simd/kernels.hpp"

namespace dfn::simd {
namespace {

float dot_scalar(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(float alpha, float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

float sum_squares_scalar(const float* x, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void gemv_scalar(const float* w, std::size_t rows, std::size_t cols,
                 const float* x, const float* b, float* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    float acc = dot_scalar(w + r * cols, x, cols);
    out[r] = b ? acc + b[r] : acc;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar,
                                 scale_scalar, sum_squares_scalar, gemv_scalar};
  return table;
}

}  // namespace dfn::simd
