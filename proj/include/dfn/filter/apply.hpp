#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dfn/core/pool.hpp"
#include "dfn/core/shard_io.hpp"
#include "dfn/filter/calibrate.hpp"
#include "dfn/filter/scorer.hpp"

namespace dfn::filter {

// Either a fixed threshold or a keep fraction; a set threshold wins.
struct FilterConfig {
  std::optional<float> threshold;
  double keep_fraction = 0.15;
  CalibrationMode mode = CalibrationMode::kExact;
  std::size_t reservoir_capacity = kDefaultReservoirCapacity;
  std::uint64_t calibration_seed = 0;

  static FilterConfig fixed(float t) {
    FilterConfig c;
    c.threshold = t;
    return c;
  }
  static FilterConfig keep(double fraction, CalibrationMode mode = CalibrationMode::kExact) {
    FilterConfig c;
    c.keep_fraction = fraction;
    c.mode = mode;
    return c;
  }
  void validate() const;
  // "threshold", "exact" or "reservoir".
  std::string mode_name() const;
};

struct ShardCounts {
  std::string path;
  std::uint64_t input_count = 0;
  std::uint64_t kept_count = 0;
  double seconds = 0.0;  // wall clock; excluded from the JSON report
};

struct FilterReport {
  std::uint64_t input_count = 0;
  std::uint64_t kept_count = 0;
  float threshold = 0.0f;
  std::optional<double> keep_fraction;
  std::string mode;
  std::vector<ShardCounts> shards;

  // Fields: input_count, kept_count, threshold, keep_fraction, mode,
  // shards[] {path, input_count, kept_count}. Deterministic bytes.
  std::string to_json() const;
  // Per-shard wall-clock seconds, kept apart so reports stay reproducible.
  std::string timings_json() const;
};

struct PoolFilterResult {
  Pool kept;
  FilterReport report;
};

struct ShardFilterResult {
  ShardSet output;
  FilterReport report;
};

// Threshold for `config` over the given scores (calibrates when no fixed
// threshold is set).
float resolve_threshold(const FilterConfig& config, std::span<const float> scores);

// In-memory apply: the pool is processed in chunks of `chunk_size` records
// spread over `workers` threads. Kept records preserve input order; the
// result does not depend on `workers`.
PoolFilterResult apply_dfn(const Scorer& scorer, const FilterConfig& config, const Pool& pool,
                           unsigned workers, std::size_t chunk_size = 16384);

// Sharded apply: one output shard per input shard (possibly empty), named
// like the input, written to `out_dir` with a manifest in input shard
// order. In keep-fraction mode a scoring pass over all shards runs first
// and the stored float scores are reused by the filter pass.
ShardFilterResult apply_dfn(const Scorer& scorer, const FilterConfig& config, const ShardSet& pool,
                            const std::filesystem::path& out_dir, unsigned workers);

}  // namespace dfn::filter
