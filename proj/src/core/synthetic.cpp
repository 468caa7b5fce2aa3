#include "dfn/core/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "dfn/core/error.hpp"
#include "dfn/core/parallel.hpp"

namespace dfn {

unsigned default_workers() {
  if (const char* env = std::getenv("DFN_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void SyntheticSpec::validate() const {
  if (num_concepts < 2) throw ValidationError("num_concepts must be >= 2");
  if (d_latent == 0 || d_img == 0 || d_txt == 0) throw ValidationError("dimensions must be positive");
  if (!(align_prob >= 0.0 && align_prob <= 1.0)) throw ValidationError("align_prob must lie in [0, 1]");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ValidationError("noise_sigma must be >= 0");
}

SyntheticSpec high_quality_spec(SyntheticSpec base) {
  base.align_prob = 0.98;
  base.noise_sigma = 0.1;
  return base;
}

SyntheticSpec noisy_spec(SyntheticSpec base) {
  base.align_prob = 0.3;
  base.noise_sigma = 0.6;
  return base;
}

namespace {

std::vector<float> apply_map(const std::vector<double>& a, std::uint32_t rows, std::uint32_t d_latent,
                             const double* c) {
  std::vector<float> out(rows);
  for (std::uint32_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::uint32_t j = 0; j < d_latent; ++j) acc += a[std::size_t{r} * d_latent + j] * c[j];
    out[r] = static_cast<float>(acc);
  }
  return out;
}

void map_plus_noise(const std::vector<double>& a, std::uint32_t rows, std::uint32_t d_latent,
                    const double* c, double sigma, Rng& rng, std::span<double> out) {
  for (std::uint32_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::uint32_t j = 0; j < d_latent; ++j) acc += a[std::size_t{r} * d_latent + j] * c[j];
    out[r] = acc;
  }
  for (std::uint32_t r = 0; r < rows; ++r) out[r] += sigma * rng.normal();
}

}  // namespace

std::vector<float> World::clean_image(std::uint32_t k) const {
  return apply_map(a_img, d_img, d_latent, concepts.data() + std::size_t{k} * d_latent);
}

std::vector<float> World::clean_text(std::uint32_t k) const {
  return apply_map(a_txt, d_txt, d_latent, concepts.data() + std::size_t{k} * d_latent);
}

std::vector<float> World::prototype_texts() const {
  std::vector<float> out;
  out.reserve(std::size_t{num_concepts} * d_txt);
  for (std::uint32_t k = 0; k < num_concepts; ++k) {
    auto t = clean_text(k);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

World make_world(const SyntheticSpec& spec) {
  spec.validate();
  World w;
  w.num_concepts = spec.num_concepts;
  w.d_latent = spec.d_latent;
  w.d_img = spec.d_img;
  w.d_txt = spec.d_txt;
  Rng rng = Rng::derive(spec.seed, {kWorldStream});
  w.concepts.resize(std::size_t{spec.num_concepts} * spec.d_latent);
  for (std::uint32_t k = 0; k < spec.num_concepts; ++k) {
    double* c = w.concepts.data() + std::size_t{k} * spec.d_latent;
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::uint32_t j = 0; j < spec.d_latent; ++j) {
        c[j] = rng.normal();
        norm2 += c[j] * c[j];
      }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::uint32_t j = 0; j < spec.d_latent; ++j) c[j] *= inv;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d_latent));
  w.a_img.resize(std::size_t{spec.d_img} * spec.d_latent);
  for (double& v : w.a_img) v = rng.normal() * scale;
  w.a_txt.resize(std::size_t{spec.d_txt} * spec.d_latent);
  for (double& v : w.a_txt) v = rng.normal() * scale;
  return w;
}

Pool generate_pool(const SyntheticSpec& spec, std::size_t n, std::uint64_t id_base) {
  return generate_pool(spec, make_world(spec), n, id_base);
}

Pool generate_pool(const SyntheticSpec& spec, const World& world, std::size_t n,
                   std::uint64_t id_base, const ImageTransform& transform) {
  spec.validate();
  if (world.d_img != spec.d_img || world.d_txt != spec.d_txt || world.d_latent != spec.d_latent ||
      world.num_concepts != spec.num_concepts) {
    throw ValidationError("world shape does not match spec");
  }
  const std::uint32_t K = spec.num_concepts;
  Pool pool(spec.dims());
  pool.reserve(n);
  std::vector<double> img(spec.d_img), txt(spec.d_txt);
  Record rec;
  rec.image.resize(spec.d_img);
  rec.text.resize(spec.d_txt);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t id = id_base + i;
    Rng rng = Rng::derive(spec.seed, {kRecordStream, id});
    const auto k = static_cast<std::uint32_t>(rng.below(K));
    map_plus_noise(world.a_img, spec.d_img, spec.d_latent,
                   world.concepts.data() + std::size_t{k} * spec.d_latent, spec.noise_sigma, rng, img);
    const bool aligned = rng.uniform() < spec.align_prob;
    const std::uint32_t text_concept =
        aligned ? k : static_cast<std::uint32_t>((k + 1 + rng.below(K - 1)) % K);
    map_plus_noise(world.a_txt, spec.d_txt, spec.d_latent,
                   world.concepts.data() + std::size_t{text_concept} * spec.d_latent, spec.noise_sigma,
                   rng, txt);
    if (transform) transform(id, img);
    for (std::uint32_t j = 0; j < spec.d_img; ++j) rec.image[j] = static_cast<float>(img[j]);
    for (std::uint32_t j = 0; j < spec.d_txt; ++j) rec.text[j] = static_cast<float>(txt[j]);
    rec.id = id;
    rec.concept_label = k;
    rec.aligned = aligned ? Alignment::kTrue : Alignment::kFalse;
    pool.push_back(rec);
  }
  return pool;
}

ShardSet generate_shards(const SyntheticSpec& spec, std::size_t n, std::uint64_t id_base,
                         const std::filesystem::path& dir, std::size_t records_per_shard,
                         unsigned workers) {
  if (records_per_shard == 0) throw ValidationError("records_per_shard must be >= 1");
  if (n == 0) throw ValidationError("generate: n must be >= 1");
  spec.validate();
  std::filesystem::create_directories(dir);
  const World world = make_world(spec);
  const std::size_t shard_count = (n + records_per_shard - 1) / records_per_shard;
  ShardSet set;
  set.root = dir;
  set.dims = spec.dims();
  set.total_records = n;
  set.shards.resize(shard_count);
  parallel_for(shard_count, workers, [&](std::size_t s) {
    const std::size_t begin = s * records_per_shard;
    const std::size_t count = std::min(records_per_shard, n - begin);
    const Pool part = generate_pool(spec, world, count, id_base + begin);
    char name[32];
    std::snprintf(name, sizeof name, "shard-%05zu.dfns", s);
    ShardRef ref{name, static_cast<std::uint32_t>(count), ""};
    ref.sha256 = write_shard(part, dir / ref.path);
    set.shards[s] = std::move(ref);
  });
  write_manifest(set);
  return set;
}

Pool mix_pools(const Pool& high_quality, const Pool& noisy, double unfiltered_fraction,
               std::size_t total, std::uint64_t seed) {
  if (!(unfiltered_fraction >= 0.0 && unfiltered_fraction <= 1.0)) {
    throw ValidationError("unfiltered_fraction must lie in [0, 1]");
  }
  if (high_quality.dims() != noisy.dims()) throw ShapeMismatchError("mix_pools: pools have different dims");
  const auto hq_count = static_cast<std::size_t>(std::llround((1.0 - unfiltered_fraction) * static_cast<double>(total)));
  const std::size_t noisy_count = total - hq_count;
  if (hq_count > high_quality.size()) {
    throw ValidationError("mix_pools: need " + std::to_string(hq_count) + " high-quality records, have " +
                          std::to_string(high_quality.size()));
  }
  if (noisy_count > noisy.size()) {
    throw ValidationError("mix_pools: need " + std::to_string(noisy_count) + " noisy records, have " +
                          std::to_string(noisy.size()));
  }
  auto sample = [](std::size_t population, std::size_t k, Rng rng) {
    std::vector<std::size_t> idx(population);
    for (std::size_t i = 0; i < population; ++i) idx[i] = i;
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(population - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto hq_idx = sample(high_quality.size(), hq_count, Rng::derive(seed, {1}));
  const auto noisy_idx = sample(noisy.size(), noisy_count, Rng::derive(seed, {2}));
  Pool out = high_quality.select(hq_idx);
  out.append(noisy.select(noisy_idx));
  return out;
}

}  // namespace dfn
