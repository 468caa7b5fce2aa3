#include "dfn/clip/model.hpp"

#include <bit>
#include <cstring>

#include "dfn/core/error.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/core/shard_io.hpp"
#include "dfn/simd/kernels.hpp"

namespace dfn::clip {
namespace {

void encode_rows(std::span<const float> w, std::span<const float> b, std::uint32_t d_in,
                 std::uint32_t d_emb, std::span<const float> features, std::span<float> out,
                 std::span<float> norms, const char* tower) {
  if (features.size() % d_in != 0) {
    throw ShapeMismatchError(std::string(tower) + " features: length " + std::to_string(features.size()) +
                             " is not a multiple of " + std::to_string(d_in));
  }
  const std::size_t n = features.size() / d_in;
  if (out.size() != n * d_emb) throw ShapeMismatchError(std::string(tower) + " output span has wrong size");
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < n; ++i) {
    float* e = out.data() + i * d_emb;
    k.gemv(w.data(), d_emb, d_in, features.data() + i * d_in, b.data(), e);
    const float norm = std::sqrt(k.sum_squares(e, d_emb));
    if (!(norm > 0.0f)) {
      if (std::isnan(norm)) throw NonFiniteError(std::string(tower) + " embedding is NaN");
      throw DegenerateInputError(std::string(tower) + " embedding is the zero vector before normalization");
    }
    if (!std::isfinite(norm)) throw NonFiniteError(std::string(tower) + " embedding is not finite");
    k.scale(1.0f / norm, e, d_emb);
    if (!norms.empty()) norms[i] = norm;
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_floats(std::vector<std::uint8_t>& out, std::span<const float> xs) {
  for (float x : xs) put_u32(out, std::bit_cast<std::uint32_t>(x));
}

}  // namespace

TwoTowerModel TwoTowerModel::random(std::uint32_t d_img, std::uint32_t d_txt, std::uint32_t d_emb,
                                    std::uint64_t seed) {
  if (d_img == 0 || d_txt == 0 || d_emb == 0) throw ValidationError("model dimensions must be positive");
  TwoTowerModel m;
  m.d_img = d_img;
  m.d_txt = d_txt;
  m.d_emb = d_emb;
  Rng rng = Rng::derive(seed, {0x494e4954ULL});
  const double si = 1.0 / std::sqrt(static_cast<double>(d_img));
  const double st = 1.0 / std::sqrt(static_cast<double>(d_txt));
  m.w_img.resize(std::size_t{d_emb} * d_img);
  for (float& v : m.w_img) v = static_cast<float>(rng.normal() * si);
  m.w_txt.resize(std::size_t{d_emb} * d_txt);
  for (float& v : m.w_txt) v = static_cast<float>(rng.normal() * st);
  m.b_img.assign(d_emb, 0.0f);
  m.b_txt.assign(d_emb, 0.0f);
  return m;
}

void TwoTowerModel::validate() const {
  if (w_img.size() != std::size_t{d_emb} * d_img || b_img.size() != d_emb ||
      w_txt.size() != std::size_t{d_emb} * d_txt || b_txt.size() != d_emb) {
    throw ShapeMismatchError("model parameter sizes do not match declared dimensions");
  }
  auto finite = [](const std::vector<float>& v) {
    for (float x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  if (!finite(w_img) || !finite(b_img) || !finite(w_txt) || !finite(b_txt) || !std::isfinite(log_temperature)) {
    throw NonFiniteError("model has non-finite parameters");
  }
}

std::vector<float> encode_image(const TwoTowerModel& m, std::span<const float> x) {
  if (x.size() != m.d_img) throw ShapeMismatchError("image features have wrong dimension");
  std::vector<float> out(m.d_emb);
  encode_rows(m.w_img, m.b_img, m.d_img, m.d_emb, x, out, {}, "image");
  return out;
}

std::vector<float> encode_text(const TwoTowerModel& m, std::span<const float> x) {
  if (x.size() != m.d_txt) throw ShapeMismatchError("text features have wrong dimension");
  std::vector<float> out(m.d_emb);
  encode_rows(m.w_txt, m.b_txt, m.d_txt, m.d_emb, x, out, {}, "text");
  return out;
}

void encode_images(const TwoTowerModel& m, std::span<const float> features, std::span<float> out,
                   std::span<float> norms) {
  encode_rows(m.w_img, m.b_img, m.d_img, m.d_emb, features, out, norms, "image");
}

void encode_texts(const TwoTowerModel& m, std::span<const float> features, std::span<float> out,
                  std::span<float> norms) {
  encode_rows(m.w_txt, m.b_txt, m.d_txt, m.d_emb, features, out, norms, "text");
}

TwoTowerModel interpolate_weights(const TwoTowerModel& base, const TwoTowerModel& finetuned, double alpha) {
  if (!base.same_shape(finetuned)) throw ShapeMismatchError("interpolate_weights: models differ in shape");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("interpolate_weights: alpha must lie in [0, 1]");
  if (alpha == 0.0) return base;
  if (alpha == 1.0) return finetuned;
  auto mix = [alpha](float a, float b) {
    return static_cast<float>((1.0 - alpha) * static_cast<double>(a) + alpha * static_cast<double>(b));
  };
  TwoTowerModel out = base;
  auto mix_vec = [&](std::vector<float>& dst, const std::vector<float>& ft) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = mix(dst[i], ft[i]);
  };
  mix_vec(out.w_img, finetuned.w_img);
  mix_vec(out.b_img, finetuned.b_img);
  mix_vec(out.w_txt, finetuned.w_txt);
  mix_vec(out.b_txt, finetuned.b_txt);
  out.log_temperature = mix(base.log_temperature, finetuned.log_temperature);
  return out;
}

std::vector<float> encode_prototypes(const TwoTowerModel& m, std::span<const float> prototype_texts) {
  std::vector<float> out(prototype_texts.size() / m.d_txt * m.d_emb);
  encode_texts(m, prototype_texts, out);
  return out;
}

std::uint32_t argmax_similarity(std::span<const float> prototype_embs, std::size_t d_emb,
                                std::span<const float> image_emb) {
  const std::size_t K = prototype_embs.size() / d_emb;
  if (K == 0) throw ValidationError("zero_shot_classify: empty prototype set");
  const auto& k = simd::kernels();
  std::uint32_t best = 0;
  float best_sim = k.dot(prototype_embs.data(), image_emb.data(), d_emb);
  for (std::size_t c = 1; c < K; ++c) {
    const float sim = k.dot(prototype_embs.data() + c * d_emb, image_emb.data(), d_emb);
    if (sim > best_sim) {
      best_sim = sim;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

std::uint32_t zero_shot_classify(const TwoTowerModel& m, std::span<const float> prototype_embs,
                                 std::span<const float> image_features) {
  if (prototype_embs.empty()) throw ValidationError("zero_shot_classify: empty prototype set");
  if (prototype_embs.size() % m.d_emb != 0) throw ShapeMismatchError("prototype embeddings have wrong width");
  const auto e = encode_image(m, image_features);
  return argmax_similarity(prototype_embs, m.d_emb, e);
}

Record augment(const Record& record, double scale, std::uint64_t seed) {
  if (!(scale >= 0.0)) throw ValidationError("augment: scale must be >= 0");
  Record out = record;
  if (scale == 0.0) return out;
  Rng rng(seed);
  for (float& v : out.image) v = static_cast<float>(v + scale * rng.normal());
  return out;
}

std::vector<std::uint8_t> encode_checkpoint(const TwoTowerModel& m) {
  m.validate();
  std::vector<std::uint8_t> out = {'D', 'F', 'N', 'M'};
  out.reserve(20 + 4 * m.parameter_count());
  put_u32(out, kCheckpointVersion);
  put_u32(out, m.d_img);
  put_u32(out, m.d_txt);
  put_u32(out, m.d_emb);
  put_floats(out, m.w_img);
  put_floats(out, m.b_img);
  put_floats(out, m.w_txt);
  put_floats(out, m.b_txt);
  put_u32(out, std::bit_cast<std::uint32_t>(m.log_temperature));
  return out;
}

TwoTowerModel decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& name) {
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[off + i]} << (8 * i);
    return v;
  };
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "DFNM", 4) != 0) {
    throw Error("checkpoint '" + name + "': bad magic");
  }
  if (bytes.size() < 20) throw Error("checkpoint '" + name + "': truncated header");
  if (u32(4) != kCheckpointVersion) throw Error("checkpoint '" + name + "': version mismatch");
  TwoTowerModel m;
  m.d_img = u32(8);
  m.d_txt = u32(12);
  m.d_emb = u32(16);
  const std::size_t count = std::size_t{m.d_emb} * m.d_img + m.d_emb + std::size_t{m.d_emb} * m.d_txt + m.d_emb + 1;
  if (bytes.size() != 20 + 4 * count) throw Error("checkpoint '" + name + "': truncated or oversized body");
  std::size_t off = 20;
  auto read = [&](std::vector<float>& v, std::size_t n) {
    v.resize(n);
    for (float& x : v) {
      x = std::bit_cast<float>(u32(off));
      off += 4;
    }
  };
  read(m.w_img, std::size_t{m.d_emb} * m.d_img);
  read(m.b_img, m.d_emb);
  read(m.w_txt, std::size_t{m.d_emb} * m.d_txt);
  read(m.b_txt, m.d_emb);
  m.log_temperature = std::bit_cast<float>(u32(off));
  m.validate();
  return m;
}

void save_checkpoint(const TwoTowerModel& m, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(m));
}

TwoTowerModel load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path), path.string());
}

}  // namespace dfn::clip
