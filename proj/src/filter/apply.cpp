#include "dfn/filter/apply.hpp"

#include <chrono>
#include <json.hpp>

#include "dfn/core/error.hpp"
#include "dfn/core/parallel.hpp"

namespace dfn::filter {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void FilterConfig::validate() const {
  if (threshold) {
    if (!std::isfinite(*threshold)) throw ValidationError("threshold must be finite");
    return;
  }
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ValidationError("keep_fraction must lie in (0, 1]");
  if (mode == CalibrationMode::kReservoir && reservoir_capacity == 0) {
    throw ValidationError("reservoir capacity must be >= 1");
  }
}

std::string FilterConfig::mode_name() const { return threshold ? "threshold" : std::string(to_string(mode)); }

std::string FilterReport::to_json() const {
  nlohmann::ordered_json j;
  j["input_count"] = input_count;
  j["kept_count"] = kept_count;
  j["threshold"] = threshold;
  j["keep_fraction"] = keep_fraction ? nlohmann::ordered_json(*keep_fraction) : nlohmann::ordered_json(nullptr);
  j["mode"] = mode;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : shards) {
    nlohmann::ordered_json e;
    e["path"] = s.path;
    e["input_count"] = s.input_count;
    e["kept_count"] = s.kept_count;
    arr.push_back(std::move(e));
  }
  j["shards"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string FilterReport::timings_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& s : shards) j.push_back({{"path", s.path}, {"seconds", s.seconds}});
  return j.dump(2) + "\n";
}

float resolve_threshold(const FilterConfig& config, std::span<const float> scores) {
  config.validate();
  if (config.threshold) return *config.threshold;
  return calibrate_threshold(scores, config.keep_fraction, config.mode, config.reservoir_capacity,
                             config.calibration_seed);
}

PoolFilterResult apply_dfn(const Scorer& scorer, const FilterConfig& config, const Pool& pool,
                           unsigned workers, std::size_t chunk_size) {
  config.validate();
  if (chunk_size == 0) throw ValidationError("chunk_size must be >= 1");
  const std::size_t n = pool.size();
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<float> scores(n);
  std::vector<double> score_seconds(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const auto t0 = Clock::now();
    const std::size_t begin = c * chunk_size;
    const std::size_t end = std::min(n, begin + chunk_size);
    score_range(scorer, pool, begin, std::span<float>(scores).subspan(begin, end - begin));
    score_seconds[c] = seconds_since(t0);
  });

  PoolFilterResult result;
  FilterReport& rep = result.report;
  rep.threshold = n == 0 && !config.threshold ? 0.0f : resolve_threshold(config, scores);
  if (!config.threshold) rep.keep_fraction = config.keep_fraction;
  rep.mode = config.mode_name();
  rep.input_count = n;

  std::vector<std::size_t> kept;
  kept.reserve(n);
  rep.shards.resize(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t end = std::min(n, begin + chunk_size);
    std::uint64_t k = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (scores[i] > rep.threshold) {
        kept.push_back(i);
        ++k;
      }
    }
    rep.shards[c] = {"chunk-" + std::to_string(c), end - begin, k, score_seconds[c]};
  }
  rep.kept_count = kept.size();
  result.kept = pool.select(kept);
  return result;
}

ShardFilterResult apply_dfn(const Scorer& scorer, const FilterConfig& config, const ShardSet& pool,
                            const std::filesystem::path& out_dir, unsigned workers) {
  config.validate();
  if (!pool.root.empty() && std::filesystem::exists(out_dir) &&
      std::filesystem::equivalent(out_dir, pool.root)) {
    throw ValidationError("output directory '" + out_dir.string() + "' is the input shard directory");
  }
  const std::size_t shard_count = pool.shards.size();
  std::vector<std::vector<float>> scores(shard_count);
  std::vector<double> seconds(shard_count, 0.0);

  auto score_shard = [&](std::size_t s) {
    const Pool part = read_shard(pool.shard_path(s), pool.dims);
    std::vector<float> out(part.size());
    try {
      score_range(scorer, part, 0, out);
    } catch (const Error& e) {
      throw Error("shard '" + pool.shard_path(s).string() + "': " + e.what());
    }
    return std::pair{part, std::move(out)};
  };

  float threshold = 0.0f;
  if (!config.threshold) {
    parallel_for(shard_count, workers, [&](std::size_t s) {
      const auto t0 = Clock::now();
      scores[s] = score_shard(s).second;
      seconds[s] += seconds_since(t0);
    });
    // Feed the calibrator in shard order so reservoir sampling is worker-independent.
    ThresholdCalibrator cal(config.mode, config.reservoir_capacity, config.calibration_seed);
    for (const auto& s : scores) cal.observe(s);
    threshold = cal.observed() == 0 ? 0.0f : cal.threshold(config.keep_fraction);
  } else {
    threshold = *config.threshold;
  }

  std::filesystem::create_directories(out_dir);
  ShardFilterResult result;
  result.output.root = out_dir;
  result.output.dims = pool.dims;
  result.output.shards.resize(shard_count);
  FilterReport& rep = result.report;
  rep.threshold = threshold;
  if (!config.threshold) rep.keep_fraction = config.keep_fraction;
  rep.mode = config.mode_name();
  rep.shards.resize(shard_count);

  parallel_for(shard_count, workers, [&](std::size_t s) {
    const auto t0 = Clock::now();
    Pool part;
    if (config.threshold) {
      auto [p, sc] = score_shard(s);
      part = std::move(p);
      scores[s] = std::move(sc);
    } else {
      part = read_shard(pool.shard_path(s), pool.dims);
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < part.size(); ++i)
      if (scores[s][i] > threshold) keep.push_back(i);
    const Pool kept = part.select(keep);
    const std::string name = std::filesystem::path(pool.shards[s].path).filename().string();
    ShardRef ref{name, static_cast<std::uint32_t>(kept.size()), ""};
    ref.sha256 = write_shard(kept, out_dir / name);
    result.output.shards[s] = std::move(ref);
    seconds[s] += seconds_since(t0);
    rep.shards[s] = {name, part.size(), kept.size(), 0.0};
  });

  for (std::size_t s = 0; s < shard_count; ++s) {
    rep.shards[s].seconds = seconds[s];
    rep.input_count += rep.shards[s].input_count;
    rep.kept_count += rep.shards[s].kept_count;
  }
  result.output.total_records = rep.kept_count;
  write_manifest(result.output);
  return result;
}

}  // namespace dfn::filter
