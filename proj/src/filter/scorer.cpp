#include "dfn/filter/scorer.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "dfn/core/error.hpp"
#include "dfn/simd/kernels.hpp"

namespace dfn::filter {
namespace {

float clip_score(const clip::TwoTowerModel& m, const RecordView& r, float* scratch) {
  if (r.image.size() != m.d_img || r.text.size() != m.d_txt) {
    throw ShapeMismatchError("record dims do not match CLIP scorer");
  }
  float* ei = scratch;
  float* et = scratch + m.d_emb;
  clip::encode_images(m, r.image, {ei, m.d_emb});
  clip::encode_texts(m, r.text, {et, m.d_emb});
  const float cos = simd::kernels().dot(ei, et, m.d_emb);
  return std::clamp(cos, -1.0f, 1.0f);
}

float binary_score(const BinaryScorer& s, const RecordView& r) {
  if (r.image.size() != s.dims.image || r.text.size() != s.dims.text) {
    throw ShapeMismatchError("record dims do not match binary scorer");
  }
  const auto& k = simd::kernels();
  float z = s.bias + k.dot(s.weights.data(), r.image.data(), s.dims.image);
  if (s.use_text) z += k.dot(s.weights.data() + s.dims.image, r.text.data(), s.dims.text);
  return 1.0f / (1.0f + std::exp(-z));
}

}  // namespace

const char* scorer_kind(const Scorer& s) noexcept {
  struct {
    const char* operator()(const ClipScorer&) const { return "clip"; }
    const char* operator()(const BinaryScorer&) const { return "binary"; }
    const char* operator()(const ConstantScorer&) const { return "constant"; }
  } v;
  return std::visit(v, s);
}

float score_alignment(const Scorer& scorer, const RecordView& record) {
  if (const auto* c = std::get_if<ClipScorer>(&scorer)) {
    std::vector<float> scratch(2 * std::size_t{c->model.d_emb});
    return clip_score(c->model, record, scratch.data());
  }
  if (const auto* b = std::get_if<BinaryScorer>(&scorer)) return binary_score(*b, record);
  return std::get<ConstantScorer>(scorer).value;
}

void score_range(const Scorer& scorer, const Pool& pool, std::size_t begin, std::span<float> out) {
  std::vector<float> scratch;
  const auto* c = std::get_if<ClipScorer>(&scorer);
  if (c) scratch.resize(2 * std::size_t{c->model.d_emb});
  for (std::size_t i = 0; i < out.size(); ++i) {
    const RecordView r = pool[begin + i];
    try {
      if (c) {
        out[i] = clip_score(c->model, r, scratch.data());
      } else if (const auto* b = std::get_if<BinaryScorer>(&scorer)) {
        out[i] = binary_score(*b, r);
      } else {
        out[i] = std::get<ConstantScorer>(scorer).value;
      }
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError("record " + std::to_string(r.id) + ": " + e.what());
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("record " + std::to_string(r.id) + ": " + e.what());
    } catch (const ShapeMismatchError& e) {
      throw ShapeMismatchError("record " + std::to_string(r.id) + ": " + e.what());
    }
  }
}

std::vector<float> score_pool(const Scorer& scorer, const Pool& pool) {
  std::vector<float> out(pool.size());
  score_range(scorer, pool, 0, out);
  return out;
}

bool clip_filter(const Scorer& scorer, const RecordView& record, float threshold) {
  return score_alignment(scorer, record) > threshold;
}

void save_binary_scorer(const BinaryScorer& s, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["kind"] = "binary";
  j["d_img"] = s.dims.image;
  j["d_txt"] = s.dims.text;
  j["use_text"] = s.use_text;
  j["bias"] = s.bias;
  j["weights"] = s.weights;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write scorer " + path.string());
  out << j.dump(1) << '\n';
}

BinaryScorer load_binary_scorer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scorer " + path.string());
  const auto j = nlohmann::json::parse(in);
  if (j.value("kind", "") != "binary") throw Error("scorer file " + path.string() + " is not a binary scorer");
  BinaryScorer s;
  s.dims = {j.at("d_img").get<std::uint32_t>(), j.at("d_txt").get<std::uint32_t>()};
  s.use_text = j.at("use_text").get<bool>();
  s.bias = j.at("bias").get<float>();
  s.weights = j.at("weights").get<std::vector<float>>();
  if (s.weights.size() != s.feature_width()) throw ShapeMismatchError("scorer weights have wrong length");
  return s;
}

}  // namespace dfn::filter
