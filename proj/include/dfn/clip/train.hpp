#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dfn/clip/model.hpp"
#include "dfn/core/pool.hpp"

namespace dfn::clip {

// Optimizer: AdamW (decoupled weight decay on the W matrices only), linear
// warmup over warmup_steps to learning_rate, then cosine decay to zero.
// steps = samples_seen / batch_size. Batches are consecutive slices of a
// stream of epoch permutations drawn from
// Rng::derive(seed, {pool.content_hash()}), so identical pools and seeds
// give identical batch orders.
struct TrainConfig {
  std::uint64_t samples_seen = 200'000;
  std::uint32_t batch_size = 256;
  double learning_rate = 5e-3;
  double weight_decay = 0.1;
  std::uint32_t warmup_steps = 50;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
  // Gaussian noise on image features per sample draw; 0 disables.
  double augment_sigma = 0.0;
  // Embedding width used when training from scratch.
  std::uint32_t d_emb = 32;
  bool learn_temperature = true;

  std::uint64_t steps() const noexcept { return batch_size ? samples_seen / batch_size : 0; }
  // Throws ValidationError. Fine-tuning allows samples_seen == 0.
  void validate(bool allow_zero_steps = false) const;
};

struct TrainLogEntry {
  std::uint64_t step;
  double loss;
  double lr;
};

struct TrainResult {
  TwoTowerModel model;
  std::vector<TrainLogEntry> log;
};

// learning-rate schedule value at 0-based step t.
double learning_rate_at(const TrainConfig& cfg, std::uint64_t t);

// Trains from TwoTowerModel::random(seed) or from `init`. Throws
// NonFiniteError naming the step if the loss diverges.
TrainResult train_clip(const Pool& pool, const TrainConfig& cfg,
                       const TwoTowerModel* init = nullptr);

// Fine-tunes on (image, prototype caption of the record's label) pairs.
// `prototype_texts` is K x d_txt. samples_seen == 0 returns `model`.
TrainResult finetune(const TwoTowerModel& model, const Pool& labeled,
                     std::span<const float> prototype_texts, const TrainConfig& cfg);

// Pool whose text features are replaced by the clean caption of each
// record's label.
Pool with_prototype_captions(const Pool& labeled, std::span<const float> prototype_texts);

// CSV with header "step,loss,lr".
void write_train_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path);

}  // namespace dfn::clip
