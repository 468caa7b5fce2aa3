#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "dfn/clip/model.hpp"
#include "dfn/core/pool.hpp"

namespace dfn::filter {

// Cosine between the two tower embeddings, in [-1, 1].
struct ClipScorer {
  clip::TwoTowerModel model;
};

// Logistic classifier: sigmoid(w . f + b) where f is the image features, or
// image features followed by text features when use_text is set.
struct BinaryScorer {
  std::vector<float> weights;
  float bias = 0.0f;
  bool use_text = false;
  Dims dims{};

  std::size_t feature_width() const noexcept { return dims.image + (use_text ? dims.text : 0); }
};

// Same score for every record; used for pass-all / drop-all baselines.
struct ConstantScorer {
  float value = 1.0f;
};

using Scorer = std::variant<ClipScorer, BinaryScorer, ConstantScorer>;

const char* scorer_kind(const Scorer& s) noexcept;

// Pure function of the record. Throws DegenerateInputError for a zero
// embedding, ShapeMismatchError for wrong dims.
float score_alignment(const Scorer& scorer, const RecordView& record);

// Scores records [begin, begin + out.size()) of `pool`. Errors are
// rethrown with the offending record id.
void score_range(const Scorer& scorer, const Pool& pool, std::size_t begin, std::span<float> out);
std::vector<float> score_pool(const Scorer& scorer, const Pool& pool);

// score > threshold, strictly.
bool clip_filter(const Scorer& scorer, const RecordView& record, float threshold);

// Binary scorer persistence (JSON). CLIP scorers use the model checkpoint.
void save_binary_scorer(const BinaryScorer& s, const std::filesystem::path& path);
BinaryScorer load_binary_scorer(const std::filesystem::path& path);

}  // namespace dfn::filter
