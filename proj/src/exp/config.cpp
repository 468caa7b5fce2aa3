#include "dfn/exp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dfn/core/error.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/core/shard_io.hpp"

namespace dfn::exp {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

const char* const kTrainFields[] = {"samples_seen", "batch_size",   "learning_rate", "weight_decay",
                                    "warmup_steps", "beta1",        "beta2",         "epsilon",
                                    "augment_sigma", "d_emb",       "learn_temperature"};

clip::TrainConfig read_train(const KeyValueConfig& kv, const std::string& p, clip::TrainConfig c) {
  c.samples_seen = kv.get_u64(p + ".samples_seen", c.samples_seen);
  c.batch_size = static_cast<std::uint32_t>(kv.get_u64(p + ".batch_size", c.batch_size));
  c.learning_rate = kv.get_double(p + ".learning_rate", c.learning_rate);
  c.weight_decay = kv.get_double(p + ".weight_decay", c.weight_decay);
  c.warmup_steps = static_cast<std::uint32_t>(kv.get_u64(p + ".warmup_steps", c.warmup_steps));
  c.beta1 = kv.get_double(p + ".beta1", c.beta1);
  c.beta2 = kv.get_double(p + ".beta2", c.beta2);
  c.epsilon = kv.get_double(p + ".epsilon", c.epsilon);
  c.augment_sigma = kv.get_double(p + ".augment_sigma", c.augment_sigma);
  c.d_emb = static_cast<std::uint32_t>(kv.get_u64(p + ".d_emb", c.d_emb));
  c.learn_temperature = kv.get_bool(p + ".learn_temperature", c.learn_temperature);
  return c;
}

void write_train(KeyValueConfig& kv, const std::string& p, const clip::TrainConfig& c) {
  kv.set(p + ".samples_seen", fmt(c.samples_seen));
  kv.set(p + ".batch_size", fmt(std::uint64_t{c.batch_size}));
  kv.set(p + ".learning_rate", fmt(c.learning_rate));
  kv.set(p + ".weight_decay", fmt(c.weight_decay));
  kv.set(p + ".warmup_steps", fmt(std::uint64_t{c.warmup_steps}));
  kv.set(p + ".beta1", fmt(c.beta1));
  kv.set(p + ".beta2", fmt(c.beta2));
  kv.set(p + ".epsilon", fmt(c.epsilon));
  kv.set(p + ".augment_sigma", fmt(c.augment_sigma));
  kv.set(p + ".d_emb", fmt(std::uint64_t{c.d_emb}));
  kv.set(p + ".learn_temperature", c.learn_temperature ? "true" : "false");
}

std::string shifts_to_string(const std::vector<eval::ShiftSpec>& shifts) {
  std::string out;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    out += (i ? "," : "") + std::string(eval::to_string(shifts[i].kind)) + ":" + fmt(shifts[i].magnitude);
  }
  return out;
}

}  // namespace

clip::TrainConfig default_dfn_training() {
  clip::TrainConfig c;
  c.augment_sigma = 0.2;
  return c;
}

clip::TrainConfig default_induced_training() {
  clip::TrainConfig c;
  c.samples_seen = 500'000;
  return c;
}

clip::TrainConfig default_finetune_training() {
  clip::TrainConfig c;
  c.samples_seen = 100'000;
  c.learning_rate = 2e-3;
  c.warmup_steps = 10;
  return c;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ValidationError(where + ": empty key");
    const auto& known = known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
    if (kv.values_.contains(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
    kv.values_[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ValidationError(origin_ + ": key '" + key + "' expects a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ValidationError(origin_ + ": key '" + key + "' expects a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ValidationError(origin_ + ": key '" + key + "' expects true or false, got '" + it->second + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!contains(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split(values_.at(key), ',')) {
    KeyValueConfig one;
    one.origin_ = origin_;
    one.values_[key] = item;
    out.push_back(one.get_double(key, 0.0));
  }
  return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64s(const std::string& key,
                                                    const std::vector<std::uint64_t>& fallback) const {
  if (!contains(key)) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split(values_.at(key), ',')) {
    KeyValueConfig one;
    one.origin_ = origin_;
    one.values_[key] = item;
    out.push_back(one.get_u64(key, 0));
  }
  return out;
}

std::string KeyValueConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string_view to_string(Preset p) noexcept {
  switch (p) {
    case Preset::kHighQuality: return "hq";
    case Preset::kNoisy: return "noisy";
    case Preset::kRaw: return "raw";
    case Preset::kTarget: return "target";
  }
  return "raw";
}

Preset parse_preset(std::string_view s) {
  if (s == "hq") return Preset::kHighQuality;
  if (s == "noisy") return Preset::kNoisy;
  if (s == "raw") return Preset::kRaw;
  if (s == "target") return Preset::kTarget;
  throw ValidationError("unknown preset '" + std::string(s) + "' (expected hq, noisy, raw or target)");
}

std::uint64_t preset_id_base(Preset p) noexcept {
  switch (p) {
    case Preset::kHighQuality: return std::uint64_t{1} << 40;
    case Preset::kNoisy: return std::uint64_t{2} << 40;
    case Preset::kRaw: return std::uint64_t{3} << 40;
    case Preset::kTarget: return std::uint64_t{4} << 40;
  }
  return 0;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {
        "experiment",
        "seeds",
        "workers",
        "world.num_concepts",
        "world.d_latent",
        "world.d_img",
        "world.d_txt",
        "hq.align_prob",
        "hq.noise_sigma",
        "noisy.align_prob",
        "noisy.noise_sigma",
        "target.noise_sigma",
        "pool.filter_train_size",
        "pool.raw_size",
        "pool.target_size",
        "pool.records_per_shard",
    };
    for (const char* prefix : {"dfn", "induced", "finetune"})
      for (const char* f : kTrainFields) k.push_back(std::string(prefix) + "." + f);
    for (const char* key : {"pretrain.samples_seen", "binary.use_text", "binary.epochs", "binary.batch_size",
                            "binary.learning_rate", "binary.l2", "filter.keep_fraction", "filter.threshold",
                            "filter.mode", "filter.reservoir_capacity", "eval.id_size", "eval.noise_sigma",
                            "eval.retrieval_size", "eval.gallery_size", "eval.shifts", "sweep.fractions",
                            "fvd.fractions", "fvd.train_sizes", "fvd.samples_seen", "interventions.schedules", "robustness.alphas",
                            "bench.n", "bench.workers", "bench.repeats", "gen.preset", "gen.count", "input.data",
                            "input.negatives", "input.model", "dfn.kind"})
      k.emplace_back(key);
    return k;
  }();
  return keys;
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.experiment = kv.get_string("experiment", c.experiment);
  c.seeds = kv.get_u64s("seeds", c.seeds);
  c.workers = static_cast<unsigned>(kv.get_u64("workers", c.workers));

  c.world.num_concepts = static_cast<std::uint32_t>(kv.get_u64("world.num_concepts", c.world.num_concepts));
  c.world.d_latent = static_cast<std::uint32_t>(kv.get_u64("world.d_latent", c.world.d_latent));
  c.world.d_img = static_cast<std::uint32_t>(kv.get_u64("world.d_img", c.world.d_img));
  c.world.d_txt = static_cast<std::uint32_t>(kv.get_u64("world.d_txt", c.world.d_txt));
  c.hq_align_prob = kv.get_double("hq.align_prob", c.hq_align_prob);
  c.hq_noise_sigma = kv.get_double("hq.noise_sigma", c.hq_noise_sigma);
  c.noisy_align_prob = kv.get_double("noisy.align_prob", c.noisy_align_prob);
  c.noisy_noise_sigma = kv.get_double("noisy.noise_sigma", c.noisy_noise_sigma);
  c.target_noise_sigma = kv.get_double("target.noise_sigma", c.target_noise_sigma);

  c.filter_train_size = kv.get_u64("pool.filter_train_size", c.filter_train_size);
  c.raw_size = kv.get_u64("pool.raw_size", c.raw_size);
  c.target_size = kv.get_u64("pool.target_size", c.target_size);
  c.records_per_shard = kv.get_u64("pool.records_per_shard", c.records_per_shard);

  c.dfn = read_train(kv, "dfn", c.dfn);
  c.induced = read_train(kv, "induced", c.induced);
  c.finetune = read_train(kv, "finetune", c.finetune);
  c.pretrain_samples_seen = kv.get_u64("pretrain.samples_seen", c.pretrain_samples_seen);

  c.binary.use_text = kv.get_bool("binary.use_text", c.binary.use_text);
  c.binary.epochs = static_cast<std::uint32_t>(kv.get_u64("binary.epochs", c.binary.epochs));
  c.binary.batch_size = static_cast<std::uint32_t>(kv.get_u64("binary.batch_size", c.binary.batch_size));
  c.binary.learning_rate = kv.get_double("binary.learning_rate", c.binary.learning_rate);
  c.binary.l2 = kv.get_double("binary.l2", c.binary.l2);

  c.filter.keep_fraction = kv.get_double("filter.keep_fraction", c.filter.keep_fraction);
  if (!kv.get_string("filter.threshold", "").empty()) {
    c.filter.threshold = static_cast<float>(kv.get_double("filter.threshold", 0.0));
  }
  c.filter.mode = filter::parse_calibration_mode(kv.get_string("filter.mode", "exact"));
  c.filter.reservoir_capacity = kv.get_u64("filter.reservoir_capacity", c.filter.reservoir_capacity);

  c.eval.id_size = kv.get_u64("eval.id_size", c.eval.id_size);
  c.eval.noise_sigma = kv.get_double("eval.noise_sigma", c.eval.noise_sigma);
  c.eval.retrieval_size = kv.get_u64("eval.retrieval_size", c.eval.retrieval_size);
  c.eval.gallery_size = static_cast<std::uint32_t>(kv.get_u64("eval.gallery_size", c.eval.gallery_size));
  if (kv.contains("eval.shifts")) {
    c.eval.shifts.clear();
    for (const auto& item : split(kv.get_string("eval.shifts", ""), ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ValidationError("eval.shifts: expected kind:magnitude, got '" + item + "'");
      KeyValueConfig one;
      one.set("m", item.substr(colon + 1));
      c.eval.shifts.push_back({eval::parse_shift_kind(item.substr(0, colon)), one.get_double("m", 0.0)});
    }
  }

  c.sweep_fractions = kv.get_doubles("sweep.fractions", c.sweep_fractions);
  c.fvd_fractions = kv.get_doubles("fvd.fractions", c.fvd_fractions);
  c.fvd_train_sizes = kv.get_u64s("fvd.train_sizes", c.fvd_train_sizes);
  c.fvd_samples_seen = kv.get_u64s("fvd.samples_seen", c.fvd_samples_seen);
  if (kv.contains("interventions.schedules")) {
    c.intervention_schedules.clear();
    for (const auto& item : split(kv.get_string("interventions.schedules", ""), ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw ValidationError("interventions.schedules: expected samples_seen:batch_size, got '" + item + "'");
      }
      KeyValueConfig one;
      one.set("a", item.substr(0, colon));
      one.set("b", item.substr(colon + 1));
      c.intervention_schedules.emplace_back(one.get_u64("a", 0), static_cast<std::uint32_t>(one.get_u64("b", 0)));
    }
  }
  c.robustness_alphas = kv.get_doubles("robustness.alphas", c.robustness_alphas);
  c.bench_n = kv.get_u64("bench.n", c.bench_n);
  c.bench_workers = kv.get_u64s("bench.workers", c.bench_workers);
  c.bench_repeats = static_cast<std::uint32_t>(kv.get_u64("bench.repeats", c.bench_repeats));

  c.gen_preset = parse_preset(kv.get_string("gen.preset", std::string(to_string(c.gen_preset))));
  c.gen_count = kv.get_u64("gen.count", c.gen_count);
  c.input_data = kv.get_string("input.data", c.input_data);
  c.input_negatives = kv.get_string("input.negatives", c.input_negatives);
  c.input_model = kv.get_string("input.model", c.input_model);
  c.dfn_kind = kv.get_string("dfn.kind", c.dfn_kind);
  return c;
}

KeyValueConfig ExperimentConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("experiment", experiment);
  kv.set("seeds", join(seeds));
  kv.set("workers", fmt(std::uint64_t{workers}));
  kv.set("world.num_concepts", fmt(std::uint64_t{world.num_concepts}));
  kv.set("world.d_latent", fmt(std::uint64_t{world.d_latent}));
  kv.set("world.d_img", fmt(std::uint64_t{world.d_img}));
  kv.set("world.d_txt", fmt(std::uint64_t{world.d_txt}));
  kv.set("hq.align_prob", fmt(hq_align_prob));
  kv.set("hq.noise_sigma", fmt(hq_noise_sigma));
  kv.set("noisy.align_prob", fmt(noisy_align_prob));
  kv.set("noisy.noise_sigma", fmt(noisy_noise_sigma));
  kv.set("target.noise_sigma", fmt(target_noise_sigma));
  kv.set("pool.filter_train_size", fmt(std::uint64_t{filter_train_size}));
  kv.set("pool.raw_size", fmt(std::uint64_t{raw_size}));
  kv.set("pool.target_size", fmt(std::uint64_t{target_size}));
  kv.set("pool.records_per_shard", fmt(std::uint64_t{records_per_shard}));
  write_train(kv, "dfn", dfn);
  write_train(kv, "induced", induced);
  write_train(kv, "finetune", finetune);
  kv.set("pretrain.samples_seen", fmt(pretrain_samples_seen));
  kv.set("binary.use_text", binary.use_text ? "true" : "false");
  kv.set("binary.epochs", fmt(std::uint64_t{binary.epochs}));
  kv.set("binary.batch_size", fmt(std::uint64_t{binary.batch_size}));
  kv.set("binary.learning_rate", fmt(binary.learning_rate));
  kv.set("binary.l2", fmt(binary.l2));
  kv.set("filter.keep_fraction", fmt(filter.keep_fraction));
  kv.set("filter.threshold", filter.threshold ? fmt(static_cast<double>(*filter.threshold)) : "");
  kv.set("filter.mode", std::string(filter::to_string(filter.mode)));
  kv.set("filter.reservoir_capacity", fmt(std::uint64_t{filter.reservoir_capacity}));
  kv.set("eval.id_size", fmt(std::uint64_t{eval.id_size}));
  kv.set("eval.noise_sigma", fmt(eval.noise_sigma));
  kv.set("eval.retrieval_size", fmt(std::uint64_t{eval.retrieval_size}));
  kv.set("eval.gallery_size", fmt(std::uint64_t{eval.gallery_size}));
  kv.set("eval.shifts", shifts_to_string(eval.shifts));
  kv.set("sweep.fractions", join(sweep_fractions));
  kv.set("fvd.fractions", join(fvd_fractions));
  kv.set("fvd.train_sizes", join(fvd_train_sizes));
  kv.set("fvd.samples_seen", join(fvd_samples_seen));
  std::string schedules;
  for (std::size_t i = 0; i < intervention_schedules.size(); ++i) {
    schedules += (i ? "," : "") + fmt(intervention_schedules[i].first) + ":" +
                 fmt(std::uint64_t{intervention_schedules[i].second});
  }
  kv.set("interventions.schedules", schedules);
  kv.set("robustness.alphas", join(robustness_alphas));
  kv.set("bench.n", fmt(std::uint64_t{bench_n}));
  kv.set("bench.workers", join(bench_workers));
  kv.set("bench.repeats", fmt(std::uint64_t{bench_repeats}));
  kv.set("gen.preset", std::string(to_string(gen_preset)));
  kv.set("gen.count", fmt(std::uint64_t{gen_count}));
  kv.set("input.data", input_data);
  kv.set("input.negatives", input_negatives);
  kv.set("input.model", input_model);
  kv.set("dfn.kind", dfn_kind);
  return kv;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ValidationError("seeds must not be empty");
  if (workers == 0) throw ValidationError("workers must be >= 1");
  for (std::uint64_t s : seeds) world_for(s).validate();
  for (Preset p : {Preset::kHighQuality, Preset::kNoisy, Preset::kRaw, Preset::kTarget}) {
    preset_spec(p, seeds.front()).validate();
  }
  if (filter_train_size == 0 || raw_size == 0 || target_size == 0) throw ValidationError("pool sizes must be >= 1");
  if (records_per_shard == 0) throw ValidationError("pool.records_per_shard must be >= 1");
  dfn.validate();
  induced.validate();
  finetune.validate(true);
  binary.validate();
  filter.validate();
  if (eval.id_size == 0 || eval.gallery_size == 0) throw ValidationError("eval.id_size and eval.gallery_size must be >= 1");
  for (const auto& s : eval.shifts) {
    if (!(s.magnitude >= 0.0)) throw ValidationError("eval.shifts: magnitudes must be >= 0");
    if (s.kind == eval::ShiftKind::kFeatureDropout && s.magnitude > 1.0) {
      throw ValidationError("eval.shifts: dropout magnitude must be <= 1");
    }
  }
  auto unit_interval = [](const std::vector<double>& v, const char* key) {
    for (double x : v)
      if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(std::string(key) + ": values must lie in [0, 1]");
  };
  unit_interval(sweep_fractions, "sweep.fractions");
  unit_interval(fvd_fractions, "fvd.fractions");
  unit_interval(robustness_alphas, "robustness.alphas");
  for (const auto& [ss, bs] : intervention_schedules) {
    if (ss == 0 || bs == 0 || ss < bs) throw ValidationError("interventions.schedules: need samples_seen >= batch_size >= 1");
  }
  for (auto n : fvd_train_sizes)
    if (n == 0) throw ValidationError("fvd.train_sizes: values must be >= 1");
  for (auto ss : fvd_samples_seen)
    if (ss < dfn.batch_size) throw ValidationError("fvd.samples_seen: values must be >= dfn.batch_size");
  if (bench_n == 0 || bench_repeats == 0) throw ValidationError("bench.n and bench.repeats must be >= 1");
  for (auto w : bench_workers)
    if (w == 0) throw ValidationError("bench.workers: values must be >= 1");
  if (dfn_kind != "clip" && dfn_kind != "binary") throw ValidationError("dfn.kind must be clip or binary");
}

SyntheticSpec ExperimentConfig::world_for(std::uint64_t seed) const {
  SyntheticSpec s = world;
  s.seed = seed;
  return s;
}

SyntheticSpec ExperimentConfig::preset_spec(Preset p, std::uint64_t seed) const {
  SyntheticSpec s = world_for(seed);
  switch (p) {
    case Preset::kHighQuality:
      s.align_prob = hq_align_prob;
      s.noise_sigma = hq_noise_sigma;
      break;
    case Preset::kNoisy:
    case Preset::kRaw:
      s.align_prob = noisy_align_prob;
      s.noise_sigma = noisy_noise_sigma;
      break;
    case Preset::kTarget:
      s.align_prob = 1.0;
      s.noise_sigma = target_noise_sigma;
      break;
  }
  return s;
}

std::size_t ExperimentConfig::preset_size(Preset p) const {
  switch (p) {
    case Preset::kHighQuality:
    case Preset::kNoisy: return filter_train_size;
    case Preset::kRaw: return raw_size;
    case Preset::kTarget: return target_size;
  }
  return raw_size;
}

clip::TrainConfig ExperimentConfig::dfn_for(std::uint64_t seed) const {
  auto c = dfn;
  c.seed = derive_seed(seed, {1});
  return c;
}

clip::TrainConfig ExperimentConfig::induced_for(std::uint64_t seed) const {
  auto c = induced;
  c.seed = derive_seed(seed, {2});
  return c;
}

clip::TrainConfig ExperimentConfig::finetune_for(std::uint64_t seed) const {
  auto c = finetune;
  c.seed = derive_seed(seed, {3});
  return c;
}

eval::EvalSpec ExperimentConfig::eval_for(std::uint64_t seed) const {
  auto e = eval;
  e.shift_seed = derive_seed(seed, {4});
  return e;
}

}  // namespace dfn::exp
