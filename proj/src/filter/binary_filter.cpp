#include "dfn/filter/binary_filter.hpp"

#include <cmath>

#include "dfn/core/error.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/simd/kernels.hpp"

namespace dfn::filter {

void BinaryFilterConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw ValidationError("binary filter: epochs and batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !(l2 >= 0.0)) throw ValidationError("binary filter: invalid learning rate or l2");
}

BinaryScorer train_binary_filter(const Pool& positives, const Pool& negatives, const BinaryFilterConfig& config) {
  config.validate();
  if (positives.empty() || negatives.empty()) throw ValidationError("train_binary_filter: both pools must be nonempty");
  if (positives.dims() != negatives.dims()) throw ShapeMismatchError("train_binary_filter: pools differ in dims");

  BinaryScorer s;
  s.dims = positives.dims();
  s.use_text = config.use_text;
  const std::size_t width = s.feature_width();
  s.weights.assign(width, 0.0f);

  const std::size_t n_pos = positives.size();
  const std::size_t n = n_pos + negatives.size();
  auto features = [&](std::size_t i, float* out) {
    const RecordView r = i < n_pos ? positives[i] : negatives[i - n_pos];
    std::copy(r.image.begin(), r.image.end(), out);
    if (s.use_text) std::copy(r.text.begin(), r.text.end(), out + s.dims.image);
  };

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng::derive(config.seed, {0x42494eULL});
  const auto& k = simd::kernels();

  std::vector<float> f(width), gw(width), m(width + 1, 0.0f), v(width + 1, 0.0f);
  const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
  std::uint64_t t = 0;
  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::fill(gw.begin(), gw.end(), 0.0f);
      float gb = 0.0f;
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = order[i];
        const float y = idx < n_pos ? 1.0f : 0.0f;
        features(idx, f.data());
        const float z = s.bias + k.dot(s.weights.data(), f.data(), width);
        const float p = 1.0f / (1.0f + std::exp(-z));
        // log(1 + e^-|z|) + max(z, 0) - y z
        loss += std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0f) - y * z;
        k.axpy(p - y, f.data(), gw.data(), width);
        gb += p - y;
      }
      const float inv = 1.0f / static_cast<float>(end - start);
      if (!std::isfinite(loss)) {
        throw NonFiniteError("train_binary_filter: non-finite loss in epoch " + std::to_string(epoch));
      }
      ++t;
      const float bc1 = 1.0f - std::pow(b1, static_cast<float>(t));
      const float bc2 = 1.0f - std::pow(b2, static_cast<float>(t));
      const auto lr = static_cast<float>(config.learning_rate);
      auto step = [&](float& param, float g, std::size_t slot) {
        m[slot] = b1 * m[slot] + (1.0f - b1) * g;
        v[slot] = b2 * v[slot] + (1.0f - b2) * g * g;
        param -= lr * (m[slot] / bc1) / (std::sqrt(v[slot] / bc2) + eps);
      };
      for (std::size_t j = 0; j < width; ++j) {
        step(s.weights[j], gw[j] * inv + static_cast<float>(config.l2) * s.weights[j], j);
      }
      step(s.bias, gb * inv, width);
    }
  }
  for (float w : s.weights)
    if (!std::isfinite(w)) throw NonFiniteError("train_binary_filter: weights became non-finite");
  return s;
}

double binary_accuracy(const BinaryScorer& scorer, const Pool& positives, const Pool& negatives) {
  std::size_t correct = 0;
  const Scorer s = scorer;
  for (std::size_t i = 0; i < positives.size(); ++i) correct += score_alignment(s, positives[i]) > 0.5f;
  for (std::size_t i = 0; i < negatives.size(); ++i) correct += score_alignment(s, negatives[i]) <= 0.5f;
  const std::size_t n = positives.size() + negatives.size();
  return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
}

}  // namespace dfn::filter
