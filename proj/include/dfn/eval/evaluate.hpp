#pragma once

// Synthetic evaluation suite and the metrics behind "filtering performance".
//
// EvalReport::average is the unweighted mean of
//   {id_accuracy, every shift accuracy, recall@1 image->text, recall@1 text->image}.
//
// Retrieval: records of the retrieval pool are ordered by id and cut into
// consecutive galleries of `gallery_size` (a trailing partial gallery is
// dropped unless it is the only one). Within a gallery, an image's query
// succeeds when its nearest text by cosine (lowest index on ties) is its
// own caption, and symmetrically for text queries.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfn/clip/model.hpp"
#include "dfn/clip/train.hpp"
#include "dfn/core/pool.hpp"
#include "dfn/core/synthetic.hpp"
#include "dfn/filter/apply.hpp"

namespace dfn::eval {

enum class ShiftKind { kNoise, kMapPerturbation, kFeatureDropout };

std::string_view to_string(ShiftKind k) noexcept;
ShiftKind parse_shift_kind(std::string_view s);

struct ShiftSpec {
  ShiftKind kind = ShiftKind::kNoise;
  double magnitude = 0.0;
  std::string name() const;
};

struct NamedPool {
  std::string name;
  Pool pool;
};

struct EvalSuite {
  std::uint32_t num_concepts = 0;
  std::vector<float> prototype_texts;  // K x d_txt clean captions
  Pool id_eval;
  std::vector<NamedPool> shifted;
  Pool retrieval;
  std::uint32_t gallery_size = 256;
};

// Id bases keep every eval pool disjoint from training pools, which the
// experiments draw from ids below kEvalIdBase.
inline constexpr std::uint64_t kEvalIdBase = std::uint64_t{1} << 56;

struct EvalSpec {
  std::size_t id_size = 5000;
  double noise_sigma = 0.5;
  std::size_t retrieval_size = 2048;
  std::uint32_t gallery_size = 256;
  std::vector<ShiftSpec> shifts = {{ShiftKind::kNoise, 0.3},
                                   {ShiftKind::kMapPerturbation, 0.5},
                                   {ShiftKind::kFeatureDropout, 0.3}};
  std::uint64_t shift_seed = 0;
};

// Labeled pool from the perturbed generator. `base` supplies the world
// (seed) and the unperturbed noise level; ids start at id_base.
NamedPool make_shifted_suite(const SyntheticSpec& base, const World& world, const ShiftSpec& shift,
                             std::uint64_t seed, std::size_t n, std::uint64_t id_base);

// `world_spec` fixes the world; its align_prob/noise are ignored in favor
// of the eval settings.
EvalSuite build_eval_suite(const SyntheticSpec& world_spec, const EvalSpec& spec);

struct EvalReport {
  double id_accuracy = 0.0;
  std::vector<std::pair<std::string, double>> shift_accuracies;
  double recall_i2t = 0.0;
  double recall_t2i = 0.0;
  double average = 0.0;

  double recompute_average() const;
  // Mean of id and shift accuracies.
  double robustness_average() const;
  // Stable field names: id_accuracy, shift_accuracies{}, recall_i2t,
  // recall_t2i, average.
  std::string to_json() const;
};

// Zero-shot accuracy of `model` on a labeled pool.
double zero_shot_accuracy(const clip::TwoTowerModel& model, std::span<const float> prototype_embs,
                          const Pool& labeled);

// Recall@1 in both directions over id-ordered galleries of gallery_size.
std::pair<double, double> retrieval_recall(const clip::TwoTowerModel& model, const Pool& aligned,
                                           std::uint32_t gallery_size);

// Throws ValidationError on an empty suite.
EvalReport evaluate(const clip::TwoTowerModel& model, const EvalSuite& suite);

struct FilteringOutcome {
  EvalReport report;
  filter::FilterReport filter_report;
  clip::TwoTowerModel induced;
};

// calibrate -> apply_dfn -> train_clip on the induced dataset -> evaluate.
// An empty induced dataset is an error naming the keep fraction.
FilteringOutcome filtering_performance(const filter::Scorer& dfn, const filter::FilterConfig& config,
                                       const Pool& raw_pool, const clip::TrainConfig& train_config,
                                       const EvalSuite& suite, unsigned workers);

// Trains on `pool` and evaluates: the no-filter baseline.
EvalReport train_and_evaluate(const Pool& pool, const clip::TrainConfig& train_config, const EvalSuite& suite);

}  // namespace dfn::eval
