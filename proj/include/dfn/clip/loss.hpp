#pragma once

// Symmetric InfoNCE over a batch of N matched pairs.
//
//   Z = s * I T^T,  s = exp(log_scale)
//   loss = 1/2 [ mean_i CE(softmax(Z_i.), i) + mean_j CE(softmax(Z_.j), j) ]
//
// Gradients: with P_r the row softmax of Z and P_c the column softmax,
//   G = dL/dZ = (P_r + P_c - 2 Id) / (2N)
//   dL/dI = s G T,   dL/dT = s G^T I,   dL/dlog_scale = sum(G o Z).
// float runs through the SIMD kernel table; double uses plain loops and is
// what the finite-difference checks exercise.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dfn/core/error.hpp"
#include "dfn/simd/kernels.hpp"

namespace dfn::clip {

template <typename T>
struct ContrastiveResult {
  T loss = 0;
  std::vector<T> grad_image;  // N x d
  std::vector<T> grad_text;   // N x d
  T grad_log_scale = 0;
};

namespace detail {

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    return simd::kernels().dot(a, b, n);
  } else {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
  }
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    simd::kernels().axpy(alpha, x, y, n);
  } else {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
  }
}

}  // namespace detail

template <typename T>
ContrastiveResult<T> contrastive_loss(std::span<const T> image_embs, std::span<const T> text_embs,
                                      std::size_t n, std::size_t d, T log_scale) {
  if (n == 0 || d == 0) throw ValidationError("contrastive_loss: empty batch");
  if (image_embs.size() != n * d || text_embs.size() != n * d) {
    throw ShapeMismatchError("contrastive_loss: embedding matrices must be N x d");
  }
  for (T v : image_embs)
    if (!std::isfinite(v)) throw NonFiniteError("contrastive_loss: non-finite image embedding");
  for (T v : text_embs)
    if (!std::isfinite(v)) throw NonFiniteError("contrastive_loss: non-finite text embedding");
  if (!std::isfinite(log_scale)) throw NonFiniteError("contrastive_loss: non-finite log_scale");

  const T s = std::exp(log_scale);
  std::vector<T> z(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      z[i * n + j] = s * detail::dot(image_embs.data() + i * d, text_embs.data() + j * d, d);
    }
  }

  // g accumulates P_r + P_c - 2 Id, scaled at the end.
  std::vector<T> g(n * n);
  T loss_rows = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = z.data() + i * n;
    T mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    T sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const T e = std::exp(row[j] - mx);
      g[i * n + j] = e;
      sum += e;
    }
    const T inv = T(1) / sum;
    for (std::size_t j = 0; j < n; ++j) g[i * n + j] *= inv;
    loss_rows += (mx + std::log(sum)) - row[i];
  }
  T loss_cols = 0;
  std::vector<T> col_max(n), col_sum(n, T(0));
  for (std::size_t j = 0; j < n; ++j) col_max[j] = z[j];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) col_max[j] = std::max(col_max[j], z[i * n + j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) col_sum[j] += std::exp(z[i * n + j] - col_max[j]);
  for (std::size_t j = 0; j < n; ++j) loss_cols += (col_max[j] + std::log(col_sum[j])) - z[j * n + j];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g[i * n + j] += std::exp(z[i * n + j] - col_max[j]) / col_sum[j];
    }
    g[i * n + i] -= T(2);
  }

  ContrastiveResult<T> out;
  out.loss = (loss_rows + loss_cols) / (T(2) * static_cast<T>(n));
  if (!std::isfinite(out.loss)) throw NonFiniteError("contrastive_loss: loss is not finite");
  const T gscale = T(1) / (T(2) * static_cast<T>(n));
  out.grad_image.assign(n * d, T(0));
  out.grad_text.assign(n * d, T(0));
  T glog = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const T gij = g[i * n + j] * gscale;
      glog += gij * z[i * n + j];
      const T c = s * gij;
      detail::axpy(c, text_embs.data() + j * d, out.grad_image.data() + i * d, d);
      detail::axpy(c, image_embs.data() + i * d, out.grad_text.data() + j * d, d);
    }
  }
  out.grad_log_scale = glog;
  return out;
}

}  // namespace dfn::clip
