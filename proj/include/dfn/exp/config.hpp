#pragma once

// Flat key-value configuration.
//
// One `key = value` per line; `#` starts a comment; blank lines are
// ignored. Keys are dotted names (`dfn.learning_rate`). Lists are
// comma-separated (`seeds = 1,2,3`). Unknown keys are an error so typos
// do not silently fall back to defaults. See README for every key.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfn/clip/train.hpp"
#include "dfn/core/synthetic.hpp"
#include "dfn/eval/evaluate.hpp"
#include "dfn/filter/apply.hpp"
#include "dfn/filter/binary_filter.hpp"

namespace dfn::exp {

class KeyValueConfig {
 public:
  // `origin` names the source in error messages.
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_u64s(const std::string& key, const std::vector<std::uint64_t>& fallback) const;

  // Sorted `key = value` lines.
  std::string to_string() const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
};

// Training data presets for `gen`. Each preset owns a disjoint id range.
enum class Preset { kHighQuality, kNoisy, kRaw, kTarget };
std::string_view to_string(Preset p) noexcept;
Preset parse_preset(std::string_view s);
std::uint64_t preset_id_base(Preset p) noexcept;

clip::TrainConfig default_dfn_training();
clip::TrainConfig default_induced_training();
clip::TrainConfig default_finetune_training();

struct ExperimentConfig {
  std::string experiment = "end-to-end";

  SyntheticSpec world;  // shape only; the seed comes from `seeds`
  double hq_align_prob = 0.98;
  double hq_noise_sigma = 0.1;
  double noisy_align_prob = 0.3;
  double noisy_noise_sigma = 0.6;
  double target_noise_sigma = 0.5;

  std::size_t filter_train_size = 10'000;
  std::size_t raw_size = 200'000;
  std::size_t target_size = 10'000;
  std::size_t records_per_shard = 16'384;

  clip::TrainConfig dfn = default_dfn_training();
  clip::TrainConfig induced = default_induced_training();
  clip::TrainConfig finetune = default_finetune_training();
  // Samples seen when pretraining the checkpoint for the init intervention.
  std::uint64_t pretrain_samples_seen = 200'000;
  filter::BinaryFilterConfig binary;

  filter::FilterConfig filter;
  eval::EvalSpec eval;

  std::vector<double> sweep_fractions = {0.0, 0.2, 0.5, 1.0};
  // Filter-vs-downstream grid: DFN training-set quality x size x samples seen.
  std::vector<double> fvd_fractions = {0.0, 1.0};
  std::vector<std::uint64_t> fvd_train_sizes = {1'000, 200'000};
  std::vector<std::uint64_t> fvd_samples_seen = {200'000, 1'000'000};
  // samples_seen:batch_size pairs for the interventions table.
  std::vector<std::pair<std::uint64_t, std::uint32_t>> intervention_schedules = {{100'000, 128}, {400'000, 512}};
  std::vector<double> robustness_alphas = {0.0, 0.25, 0.5, 0.75, 1.0};

  std::size_t bench_n = 250'000;
  std::vector<std::uint64_t> bench_workers = {1, 2, 4, 8};
  std::uint32_t bench_repeats = 3;

  std::vector<std::uint64_t> seeds = {1, 2, 3};
  unsigned workers = 1;

  // Single-step commands.
  Preset gen_preset = Preset::kRaw;
  std::size_t gen_count = 0;  // 0: preset default size
  std::string input_data;
  std::string input_negatives;
  std::string input_model;
  std::string dfn_kind = "clip";  // clip | binary

  static ExperimentConfig from(const KeyValueConfig& kv);
  // Every key with its effective value; from(to_kv()) reproduces *this.
  KeyValueConfig to_kv() const;
  // Throws ValidationError.
  void validate() const;

  // Per-seed views.
  SyntheticSpec world_for(std::uint64_t seed) const;
  SyntheticSpec preset_spec(Preset p, std::uint64_t seed) const;
  std::size_t preset_size(Preset p) const;
  clip::TrainConfig dfn_for(std::uint64_t seed) const;
  clip::TrainConfig induced_for(std::uint64_t seed) const;
  clip::TrainConfig finetune_for(std::uint64_t seed) const;
  eval::EvalSpec eval_for(std::uint64_t seed) const;
};

// Documented keys, in README order.
const std::vector<std::string>& known_keys();

}  // namespace dfn::exp
