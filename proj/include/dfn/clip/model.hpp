#pragma once

// Two-tower linear contrastive model.
//
// Each tower is e = (W x + b) / ||W x + b||. The similarity scale
// s = exp(log_temperature) multiplies cosine similarities to give logits.
// It starts at 1/0.07 (about 14.3) and is clamped to [kMinLogitScale,
// kMaxLogitScale] after every optimizer step.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dfn/core/pool.hpp"

namespace dfn::clip {

inline constexpr float kInitLogitScale = 1.0f / 0.07f;
inline constexpr float kMinLogitScale = 1.0f;
inline constexpr float kMaxLogitScale = 100.0f;

struct TwoTowerModel {
  std::uint32_t d_img = 0;
  std::uint32_t d_txt = 0;
  std::uint32_t d_emb = 0;
  std::vector<float> w_img;  // d_emb x d_img, row-major
  std::vector<float> b_img;  // d_emb
  std::vector<float> w_txt;  // d_emb x d_txt
  std::vector<float> b_txt;  // d_emb
  float log_temperature = std::log(kInitLogitScale);

  // W ~ N(0, 1/d_in), b = 0, scale = kInitLogitScale.
  static TwoTowerModel random(std::uint32_t d_img, std::uint32_t d_txt, std::uint32_t d_emb,
                              std::uint64_t seed);

  float logit_scale() const noexcept { return std::exp(log_temperature); }
  bool same_shape(const TwoTowerModel& other) const noexcept {
    return d_img == other.d_img && d_txt == other.d_txt && d_emb == other.d_emb;
  }
  std::size_t parameter_count() const noexcept { return w_img.size() + b_img.size() + w_txt.size() + b_txt.size() + 1; }
  // Throws NonFiniteError / ShapeMismatchError.
  void validate() const;

  friend bool operator==(const TwoTowerModel&, const TwoTowerModel&) = default;
};

// Unit embeddings. Throw ShapeMismatchError on wrong input length and
// DegenerateInputError when W x + b is the zero vector.
std::vector<float> encode_image(const TwoTowerModel& m, std::span<const float> image_features);
std::vector<float> encode_text(const TwoTowerModel& m, std::span<const float> text_features);

// Batched forms: `features` holds n rows of the tower's input width; `out`
// receives n rows of d_emb. Pre-normalization norms go to `norms` if given.
void encode_images(const TwoTowerModel& m, std::span<const float> features, std::span<float> out,
                   std::span<float> norms = {});
void encode_texts(const TwoTowerModel& m, std::span<const float> features, std::span<float> out,
                  std::span<float> norms = {});

// p = (1 - alpha) p_base + alpha p_finetuned for every parameter including
// log_temperature. alpha = 0 and alpha = 1 return the endpoints exactly.
TwoTowerModel interpolate_weights(const TwoTowerModel& base, const TwoTowerModel& finetuned, double alpha);

// Encodes K x d_txt prototype captions into K x d_emb unit embeddings.
std::vector<float> encode_prototypes(const TwoTowerModel& m, std::span<const float> prototype_texts);

// argmax_k cos(encode_image(x), prototype_k), lowest index on ties.
// `prototype_embs` is K x d_emb with unit rows.
std::uint32_t zero_shot_classify(const TwoTowerModel& m, std::span<const float> prototype_embs,
                                 std::span<const float> image_features);
// Same decision rule on an already-encoded image.
std::uint32_t argmax_similarity(std::span<const float> prototype_embs, std::size_t d_emb,
                                std::span<const float> image_emb);

// Adds N(0, scale^2) noise to the image features from Rng(seed); text is
// untouched. scale = 0 returns the record unchanged.
Record augment(const Record& record, double scale, std::uint64_t seed);

// Checkpoint: "DFNM" | version u32 (=1) | d_img u32 | d_txt u32 | d_emb u32 |
// w_img | b_img | w_txt | b_txt | log_temperature, all f32 little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::vector<std::uint8_t> encode_checkpoint(const TwoTowerModel& m);
TwoTowerModel decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& name);
void save_checkpoint(const TwoTowerModel& m, const std::filesystem::path& path);
TwoTowerModel load_checkpoint(const std::filesystem::path& path);

}  // namespace dfn::clip
