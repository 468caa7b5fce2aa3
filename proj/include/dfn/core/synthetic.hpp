#pragma once

// Concept-based synthetic image-text generator.
//
// A "world" is derived from SyntheticSpec::seed alone: K unit concept
// vectors in R^d_latent (normalized Gaussians) and two fixed linear maps
// A_img (d_img x d_latent), A_txt (d_txt x d_latent) with i.i.d.
// N(0, 1/d_latent) entries. Pools generated with the same seed share a
// world, so a high-quality pool and a noisy pool differ only in
// align_prob / noise_sigma and in their id ranges.
//
// Record `id` draws from its own stream Rng::derive(seed, {kRecordStream, id})
// in this order: concept k = below(K); d_img image normals; one uniform u
// for alignment; if u >= align_prob, k' = (k + 1 + below(K-1)) mod K;
// d_txt text normals. Features are computed in double and rounded to float,
// so output depends only on (spec, id).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "dfn/core/pool.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/core/shard_io.hpp"

namespace dfn {

struct SyntheticSpec {
  std::uint32_t num_concepts = 50;
  std::uint32_t d_latent = 32;
  std::uint32_t d_img = 64;
  std::uint32_t d_txt = 64;
  double align_prob = 0.98;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;

  // Throws ValidationError.
  void validate() const;
  Dims dims() const noexcept { return {d_img, d_txt}; }
};

// High-quality and unfiltered presets; `base` supplies world shape and seed.
SyntheticSpec high_quality_spec(SyntheticSpec base);
SyntheticSpec noisy_spec(SyntheticSpec base);

inline constexpr std::uint64_t kWorldStream = 0x574f524c44ULL;   // "WORLD"
inline constexpr std::uint64_t kRecordStream = 0x5245434fULL;    // "RECO"

struct World {
  std::uint32_t num_concepts = 0;
  std::uint32_t d_latent = 0;
  std::uint32_t d_img = 0;
  std::uint32_t d_txt = 0;
  std::vector<double> concepts;  // K x d_latent, unit rows
  std::vector<double> a_img;     // d_img x d_latent
  std::vector<double> a_txt;     // d_txt x d_latent

  std::vector<float> clean_image(std::uint32_t concept_id) const;
  std::vector<float> clean_text(std::uint32_t concept_id) const;
  // K x d_txt clean text features, one row per concept.
  std::vector<float> prototype_texts() const;
};

World make_world(const SyntheticSpec& spec);

// Optional per-record hook applied to the image features after noise.
using ImageTransform = std::function<void(std::uint64_t id, std::span<double> image)>;

// Records with ids id_base .. id_base + n - 1.
Pool generate_pool(const SyntheticSpec& spec, std::size_t n, std::uint64_t id_base = 0);
Pool generate_pool(const SyntheticSpec& spec, const World& world, std::size_t n,
                   std::uint64_t id_base, const ImageTransform& transform = {});

// Generates straight to shards, one generation task per shard on up to
// `workers` threads. Output is byte-identical to
// write_shards(generate_pool(spec, n, id_base), dir, records_per_shard).
ShardSet generate_shards(const SyntheticSpec& spec, std::size_t n, std::uint64_t id_base,
                         const std::filesystem::path& dir, std::size_t records_per_shard,
                         unsigned workers);

// round((1 - unfiltered_fraction) * total) records sampled without
// replacement from `high_quality`, the remainder from `noisy`. Each part
// keeps its source order; the high-quality part comes first.
Pool mix_pools(const Pool& high_quality, const Pool& noisy, double unfiltered_fraction,
               std::size_t total, std::uint64_t seed);

}  // namespace dfn
