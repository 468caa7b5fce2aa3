#include "dfn/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "dfn/core/error.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/simd/kernels.hpp"

namespace dfn::eval {
namespace {

constexpr std::uint64_t kShiftStream = 0x5348494654ULL;  // "SHIFT"
// Offsets of each eval pool inside the eval id range.
constexpr std::uint64_t kIdEvalOffset = 0;
constexpr std::uint64_t kRetrievalOffset = std::uint64_t{1} << 40;
constexpr std::uint64_t kShiftOffset = std::uint64_t{2} << 40;

}  // namespace

std::string_view to_string(ShiftKind k) noexcept {
  switch (k) {
    case ShiftKind::kNoise: return "noise";
    case ShiftKind::kMapPerturbation: return "map";
    case ShiftKind::kFeatureDropout: return "dropout";
  }
  return "noise";
}

ShiftKind parse_shift_kind(std::string_view s) {
  if (s == "noise") return ShiftKind::kNoise;
  if (s == "map") return ShiftKind::kMapPerturbation;
  if (s == "dropout") return ShiftKind::kFeatureDropout;
  throw ValidationError("unknown shift kind '" + std::string(s) + "' (expected noise, map or dropout)");
}

std::string ShiftSpec::name() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s@%g", std::string(to_string(kind)).c_str(), magnitude);
  return buf;
}

NamedPool make_shifted_suite(const SyntheticSpec& base, const World& world, const ShiftSpec& shift,
                             std::uint64_t seed, std::size_t n, std::uint64_t id_base) {
  if (!(shift.magnitude >= 0.0) || !std::isfinite(shift.magnitude)) {
    throw ValidationError("shift magnitude must be >= 0");
  }
  SyntheticSpec spec = base;
  World shifted_world = world;
  ImageTransform transform;
  switch (shift.kind) {
    case ShiftKind::kNoise:
      spec.noise_sigma = base.noise_sigma + shift.magnitude;
      break;
    case ShiftKind::kMapPerturbation: {
      Rng rng = Rng::derive(seed, {kShiftStream, 1});
      const double scale = shift.magnitude / std::sqrt(static_cast<double>(world.d_latent));
      for (double& a : shifted_world.a_img) a += scale * rng.normal();
      break;
    }
    case ShiftKind::kFeatureDropout: {
      if (shift.magnitude > 1.0) throw ValidationError("dropout magnitude must be <= 1");
      const double p = shift.magnitude;
      transform = [seed, p](std::uint64_t id, std::span<double> image) {
        Rng rng = Rng::derive(seed, {kShiftStream, 2, id});
        for (double& v : image)
          if (rng.uniform() < p) v = 0.0;
      };
      break;
    }
  }
  return {shift.name(), generate_pool(spec, shifted_world, n, id_base, transform)};
}

EvalSuite build_eval_suite(const SyntheticSpec& world_spec, const EvalSpec& spec) {
  if (spec.id_size == 0) throw ValidationError("eval id_size must be >= 1");
  if (spec.gallery_size == 0) throw ValidationError("gallery size must be >= 1");
  SyntheticSpec eval_spec = world_spec;
  eval_spec.align_prob = 1.0;
  eval_spec.noise_sigma = spec.noise_sigma;
  const World world = make_world(eval_spec);
  EvalSuite suite;
  suite.num_concepts = world.num_concepts;
  suite.prototype_texts = world.prototype_texts();
  suite.gallery_size = spec.gallery_size;
  suite.id_eval = generate_pool(eval_spec, world, spec.id_size, kEvalIdBase + kIdEvalOffset);
  if (spec.retrieval_size > 0) {
    suite.retrieval = generate_pool(eval_spec, world, spec.retrieval_size, kEvalIdBase + kRetrievalOffset);
  }
  for (std::size_t i = 0; i < spec.shifts.size(); ++i) {
    const std::uint64_t base = kEvalIdBase + kShiftOffset + (std::uint64_t{i} << 32);
    suite.shifted.push_back(make_shifted_suite(eval_spec, world, spec.shifts[i],
                                               derive_seed(spec.shift_seed, {i}), spec.id_size, base));
  }
  return suite;
}

double EvalReport::recompute_average() const {
  double sum = id_accuracy + recall_i2t + recall_t2i;
  for (const auto& [_, acc] : shift_accuracies) sum += acc;
  return sum / static_cast<double>(3 + shift_accuracies.size());
}

double EvalReport::robustness_average() const {
  double sum = id_accuracy;
  for (const auto& [_, acc] : shift_accuracies) sum += acc;
  return sum / static_cast<double>(1 + shift_accuracies.size());
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["id_accuracy"] = id_accuracy;
  nlohmann::ordered_json shifts = nlohmann::ordered_json::object();
  for (const auto& [name, acc] : shift_accuracies) shifts[name] = acc;
  j["shift_accuracies"] = std::move(shifts);
  j["recall_i2t"] = recall_i2t;
  j["recall_t2i"] = recall_t2i;
  j["average"] = average;
  return j.dump(2) + "\n";
}

double zero_shot_accuracy(const clip::TwoTowerModel& model, std::span<const float> prototype_embs,
                          const Pool& labeled) {
  if (labeled.empty()) throw ValidationError("zero_shot_accuracy: empty eval pool");
  std::vector<float> emb(labeled.size() * model.d_emb);
  clip::encode_images(model, labeled.image_data(), emb);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    const auto pred = clip::argmax_similarity(prototype_embs, model.d_emb,
                                              std::span<const float>(emb).subspan(i * model.d_emb, model.d_emb));
    correct += pred == labeled[i].concept_label;
  }
  return static_cast<double>(correct) / static_cast<double>(labeled.size());
}

std::pair<double, double> retrieval_recall(const clip::TwoTowerModel& model, const Pool& aligned,
                                           std::uint32_t gallery_size) {
  if (aligned.empty()) throw ValidationError("retrieval_recall: empty retrieval pool");
  if (gallery_size == 0) throw ValidationError("retrieval_recall: gallery size must be >= 1");
  std::vector<std::size_t> order(aligned.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return aligned[a].id < aligned[b].id; });
  const Pool sorted = aligned.select(order);
  const std::size_t d = model.d_emb;
  std::vector<float> ie(sorted.size() * d), te(sorted.size() * d);
  clip::encode_images(model, sorted.image_data(), ie);
  clip::encode_texts(model, sorted.text_data(), te);

  std::size_t g = gallery_size;
  std::size_t galleries = sorted.size() / g;
  if (galleries == 0) {
    g = sorted.size();
    galleries = 1;
  }
  const auto& k = simd::kernels();
  std::size_t hit_i2t = 0, hit_t2i = 0;
  std::vector<float> sims(g * g);
  for (std::size_t gi = 0; gi < galleries; ++gi) {
    const float* I = ie.data() + gi * g * d;
    const float* T = te.data() + gi * g * d;
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t b = 0; b < g; ++b) sims[a * g + b] = k.dot(I + a * d, T + b * d, d);
    for (std::size_t a = 0; a < g; ++a) {
      std::size_t best = 0;
      for (std::size_t b = 1; b < g; ++b)
        if (sims[a * g + b] > sims[a * g + best]) best = b;
      hit_i2t += best == a;
    }
    for (std::size_t b = 0; b < g; ++b) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < g; ++a)
        if (sims[a * g + b] > sims[best * g + b]) best = a;
      hit_t2i += best == b;
    }
  }
  const double total = static_cast<double>(galleries * g);
  return {static_cast<double>(hit_i2t) / total, static_cast<double>(hit_t2i) / total};
}

EvalReport evaluate(const clip::TwoTowerModel& model, const EvalSuite& suite) {
  if (suite.id_eval.empty() || suite.prototype_texts.empty()) throw ValidationError("evaluate: empty eval suite");
  const auto protos = clip::encode_prototypes(model, suite.prototype_texts);
  EvalReport r;
  r.id_accuracy = zero_shot_accuracy(model, protos, suite.id_eval);
  for (const auto& s : suite.shifted) r.shift_accuracies.emplace_back(s.name, zero_shot_accuracy(model, protos, s.pool));
  if (!suite.retrieval.empty()) std::tie(r.recall_i2t, r.recall_t2i) = retrieval_recall(model, suite.retrieval, suite.gallery_size);
  r.average = r.recompute_average();
  return r;
}

FilteringOutcome filtering_performance(const filter::Scorer& dfn, const filter::FilterConfig& config,
                                       const Pool& raw_pool, const clip::TrainConfig& train_config,
                                       const EvalSuite& suite, unsigned workers) {
  if (raw_pool.empty()) throw ValidationError("filtering_performance: raw pool is empty");
  auto filtered = filter::apply_dfn(dfn, config, raw_pool, workers);
  if (filtered.kept.empty()) {
    throw ValidationError(config.threshold
                              ? "filtering_performance: threshold " + std::to_string(*config.threshold) +
                                    " kept no records"
                              : "filtering_performance: keep_fraction " + std::to_string(config.keep_fraction) +
                                    " kept no records");
  }
  auto trained = clip::train_clip(filtered.kept, train_config);
  FilteringOutcome out{evaluate(trained.model, suite), std::move(filtered.report), std::move(trained.model)};
  return out;
}

EvalReport train_and_evaluate(const Pool& pool, const clip::TrainConfig& train_config, const EvalSuite& suite) {
  return evaluate(clip::train_clip(pool, train_config).model, suite);
}

}  // namespace dfn::eval
