#pragma once

// Float32 inner-loop kernels shared by encoding, loss and scoring.
//
// Every kernel exists as a scalar reference and, where the target supports
// it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The active table is
// picked once per process from CPUID; set DFN_SIMD=scalar to force the
// reference path. Variants agree to within float rounding, not bitwise,
// because the vector paths reassociate sums.

#include <cstddef>
#include <string_view>

namespace dfn::simd {

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  float (*dot)(const float* a, const float* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  // x *= alpha
  void (*scale)(float alpha, float* x, std::size_t n);
  // sum_i x[i]^2
  float (*sum_squares)(const float* x, std::size_t n);
  // out = W x + b, W row-major rows x cols; b may be null.
  void (*gemv)(const float* w, std::size_t rows, std::size_t cols,
               const float* x, const float* b, float* out);
};

const KernelTable& scalar_kernels();
// Null when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Table selected for this process.
const KernelTable& kernels();

// Overrides the selection ("scalar", "avx2", "neon", "auto"). Returns false
// if the requested variant is unavailable; the selection is then unchanged.
bool select_kernels(std::string_view which);

}  // namespace dfn::simd
