#pragma once

#include <cstdint>

#include "dfn/core/pool.hpp"
#include "dfn/filter/scorer.hpp"

namespace dfn::filter {

// Logistic regression trained by minibatch Adam on the mean log loss plus
// 0.5 * l2 * ||w||^2. Positives are labeled 1, negatives 0.
struct BinaryFilterConfig {
  bool use_text = false;
  std::uint32_t epochs = 20;
  std::uint32_t batch_size = 256;
  double learning_rate = 1e-2;
  double l2 = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

BinaryScorer train_binary_filter(const Pool& positives, const Pool& negatives, const BinaryFilterConfig& config);

// Fraction of records classified correctly at probability 0.5.
double binary_accuracy(const BinaryScorer& scorer, const Pool& positives, const Pool& negatives);

}  // namespace dfn::filter
