#include "dfn/clip/train.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "dfn/clip/loss.hpp"
#include "dfn/core/error.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/simd/kernels.hpp"

namespace dfn::clip {
namespace {

constexpr std::uint64_t kAugStream = 0x415547ULL;  // "AUG"

// Cycles through fresh permutations of [0, n).
class BatchStream {
 public:
  BatchStream(std::size_t n, Rng rng) : rng_(rng), perm_(n) {
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    reshuffle();
  }

  void next(std::span<std::size_t> out) {
    for (auto& idx : out) {
      if (pos_ == perm_.size()) reshuffle();
      idx = perm_[pos_++];
    }
  }

 private:
  void reshuffle() {
    rng_.shuffle(std::span<std::size_t>(perm_));
    pos_ = 0;
  }

  Rng rng_;
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
};

struct AdamState {
  std::vector<float> m, v;
  explicit AdamState(std::size_t n) : m(n, 0.0f), v(n, 0.0f) {}
};

// One tower's forward and backward pass over a batch.
struct Tower {
  std::uint32_t d_in;
  std::uint32_t d_emb;
  std::vector<float> x;      // B x d_in
  std::vector<float> e;      // B x d_emb
  std::vector<float> norms;  // B
  std::vector<float> gw;     // d_emb x d_in
  std::vector<float> gb;     // d_emb

  Tower(std::uint32_t in, std::uint32_t emb, std::size_t batch)
      : d_in(in), d_emb(emb), x(batch * in), e(batch * emb), norms(batch), gw(std::size_t{emb} * in), gb(emb) {}

  void backward(std::span<const float> grad_e, std::size_t batch) {
    const auto& k = simd::kernels();
    std::fill(gw.begin(), gw.end(), 0.0f);
    std::fill(gb.begin(), gb.end(), 0.0f);
    std::vector<float> du(d_emb);
    for (std::size_t i = 0; i < batch; ++i) {
      const float* ei = e.data() + i * d_emb;
      const float* gi = grad_e.data() + i * d_emb;
      const float proj = k.dot(ei, gi, d_emb);
      const float inv = 1.0f / norms[i];
      for (std::uint32_t r = 0; r < d_emb; ++r) du[r] = (gi[r] - ei[r] * proj) * inv;
      const float* xi = x.data() + i * d_in;
      for (std::uint32_t r = 0; r < d_emb; ++r) {
        k.axpy(du[r], xi, gw.data() + std::size_t{r} * d_in, d_in);
        gb[r] += du[r];
      }
    }
  }
};

void adam_update(std::vector<float>& p, const std::vector<float>& g, AdamState& st, const TrainConfig& cfg,
                 double lr, std::uint64_t t, bool decay) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const auto b1 = static_cast<float>(cfg.beta1);
  const auto b2 = static_cast<float>(cfg.beta2);
  const auto step = static_cast<float>(lr / bc1);
  const auto inv_bc2 = static_cast<float>(1.0 / bc2);
  const auto eps = static_cast<float>(cfg.epsilon);
  const auto wd = decay ? static_cast<float>(lr * cfg.weight_decay) : 0.0f;
  for (std::size_t i = 0; i < p.size(); ++i) {
    st.m[i] = b1 * st.m[i] + (1.0f - b1) * g[i];
    st.v[i] = b2 * st.v[i] + (1.0f - b2) * g[i] * g[i];
    p[i] -= wd * p[i];
    p[i] -= step * st.m[i] / (std::sqrt(st.v[i] * inv_bc2) + eps);
  }
}

}  // namespace

void TrainConfig::validate(bool allow_zero_steps) const {
  if (batch_size < 2) throw ValidationError("batch_size must be >= 2 (contrastive loss needs negatives)");
  if (!allow_zero_steps && samples_seen < batch_size) throw ValidationError("samples_seen must be >= batch_size");
  if (!(learning_rate >= 0.0) || !(weight_decay >= 0.0)) {
    throw ValidationError("learning_rate and weight_decay must be nonnegative");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw ValidationError("invalid Adam moments configuration");
  }
  if (!(augment_sigma >= 0.0)) throw ValidationError("augment_sigma must be >= 0");
  if (d_emb == 0) throw ValidationError("d_emb must be positive");
}

double learning_rate_at(const TrainConfig& cfg, std::uint64_t t) {
  const std::uint64_t total = cfg.steps();
  if (t < cfg.warmup_steps) {
    return cfg.learning_rate * static_cast<double>(t + 1) / static_cast<double>(cfg.warmup_steps);
  }
  if (total <= cfg.warmup_steps) return cfg.learning_rate;
  const double progress = static_cast<double>(t - cfg.warmup_steps) / static_cast<double>(total - cfg.warmup_steps);
  return 0.5 * cfg.learning_rate * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainResult train_clip(const Pool& pool, const TrainConfig& cfg, const TwoTowerModel* init) {
  cfg.validate(init != nullptr);
  if (pool.empty()) throw ValidationError("train_clip: pool is empty");
  const Dims dims = pool.dims();
  TrainResult result;
  result.model = init ? *init : TwoTowerModel::random(dims.image, dims.text, cfg.d_emb, cfg.seed);
  TwoTowerModel& m = result.model;
  if (m.d_img != dims.image || m.d_txt != dims.text) {
    throw ShapeMismatchError("train_clip: model input dims do not match pool");
  }
  const std::uint64_t steps = cfg.steps();
  if (steps == 0) return result;

  const std::size_t B = cfg.batch_size;
  BatchStream batches(pool.size(), Rng::derive(cfg.seed, {pool.content_hash()}));
  std::vector<std::size_t> idx(B);
  Tower img(m.d_img, m.d_emb, B), txt(m.d_txt, m.d_emb, B);
  AdamState st_wi(m.w_img.size()), st_bi(m.b_img.size()), st_wt(m.w_txt.size()), st_bt(m.b_txt.size());
  AdamState st_t(1);
  const auto images = pool.image_data();
  const auto texts = pool.text_data();
  result.log.reserve(steps);

  for (std::uint64_t t = 0; t < steps; ++t) {
    batches.next(idx);
    for (std::size_t i = 0; i < B; ++i) {
      std::copy_n(images.data() + idx[i] * dims.image, dims.image, img.x.data() + i * dims.image);
      std::copy_n(texts.data() + idx[i] * dims.text, dims.text, txt.x.data() + i * dims.text);
    }
    if (cfg.augment_sigma > 0.0) {
      for (std::size_t i = 0; i < B; ++i) {
        Rng rng = Rng::derive(cfg.seed, {kAugStream, t, i});
        float* x = img.x.data() + i * dims.image;
        for (std::uint32_t j = 0; j < dims.image; ++j) x[j] = static_cast<float>(x[j] + cfg.augment_sigma * rng.normal());
      }
    }
    try {
      encode_images(m, img.x, img.e, img.norms);
      encode_texts(m, txt.x, txt.e, txt.norms);
    } catch (const Error& e) {
      throw NonFiniteError("train_clip: step " + std::to_string(t) + ": " + e.what());
    }
    ContrastiveResult<float> r;
    try {
      r = contrastive_loss<float>(img.e, txt.e, B, m.d_emb, m.log_temperature);
    } catch (const Error& e) {
      throw NonFiniteError("train_clip: step " + std::to_string(t) + ": " + e.what());
    }
    img.backward(r.grad_image, B);
    txt.backward(r.grad_text, B);

    const double lr = learning_rate_at(cfg, t);
    adam_update(m.w_img, img.gw, st_wi, cfg, lr, t + 1, true);
    adam_update(m.b_img, img.gb, st_bi, cfg, lr, t + 1, false);
    adam_update(m.w_txt, txt.gw, st_wt, cfg, lr, t + 1, true);
    adam_update(m.b_txt, txt.gb, st_bt, cfg, lr, t + 1, false);
    if (cfg.learn_temperature) {
      std::vector<float> p{m.log_temperature}, g{r.grad_log_scale};
      adam_update(p, g, st_t, cfg, lr, t + 1, false);
      m.log_temperature = std::clamp(p[0], std::log(kMinLogitScale), std::log(kMaxLogitScale));
    }
    result.log.push_back({t, static_cast<double>(r.loss), lr});
  }
  try {
    m.validate();
  } catch (const NonFiniteError&) {
    throw NonFiniteError("train_clip: parameters became non-finite by step " + std::to_string(steps - 1));
  }
  return result;
}

Pool with_prototype_captions(const Pool& labeled, std::span<const float> prototype_texts) {
  const Dims dims = labeled.dims();
  const std::size_t K = prototype_texts.size() / dims.text;
  Pool out(dims);
  out.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    RecordView r = labeled[i];
    if (r.concept_label >= K) {
      throw ValidationError("record " + std::to_string(r.id) + " has no usable concept label");
    }
    r.text = prototype_texts.subspan(std::size_t{r.concept_label} * dims.text, dims.text);
    r.aligned = Alignment::kTrue;
    out.push_back(r);
  }
  return out;
}

TrainResult finetune(const TwoTowerModel& model, const Pool& labeled, std::span<const float> prototype_texts,
                     const TrainConfig& cfg) {
  cfg.validate(true);
  if (cfg.steps() == 0) return {model, {}};
  return train_clip(with_prototype_captions(labeled, prototype_texts), cfg, &model);
}

void write_train_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write training log " + path.string());
  out << "step,loss,lr\n";
  char buf[96];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g\n", static_cast<unsigned long long>(e.step), e.loss, e.lr);
    out << buf;
  }
}

}  // namespace dfn::clip
