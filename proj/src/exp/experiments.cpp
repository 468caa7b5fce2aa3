#include <chrono>
#include <cstdio>

#include "dfn/clip/train.hpp"
#include "dfn/core/error.hpp"
#include "dfn/core/rng.hpp"
#include "dfn/exp/experiments.hpp"
#include "dfn/filter/apply.hpp"

namespace dfn::exp {
namespace {

std::string format(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void say(const Logger& log, const std::string& line) {
  if (log) log(line);
}

filter::FilterConfig filter_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  auto f = cfg.filter;
  f.calibration_seed = derive_seed(seed, {6});
  return f;
}

eval::FilteringOutcome induce(const ExperimentConfig& cfg, const SeedData& d, const clip::TwoTowerModel& dfn) {
  return eval::filtering_performance(filter::ClipScorer{dfn}, filter_for(cfg, d.seed), d.raw, cfg.induced_for(d.seed),
                                     d.suite, cfg.workers);
}

clip::TwoTowerModel finetuned(const ExperimentConfig& cfg, const SeedData& d, const clip::TwoTowerModel& base) {
  return clip::finetune(base, d.target, d.world.prototype_texts(), cfg.finetune_for(d.seed)).model;
}

}  // namespace

SeedData make_seed_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedData d;
  d.seed = seed;
  d.world = make_world(cfg.world_for(seed));
  auto pool = [&](Preset p) {
    return generate_pool(cfg.preset_spec(p, seed), d.world, cfg.preset_size(p), preset_id_base(p));
  };
  d.high_quality = pool(Preset::kHighQuality);
  d.noisy = pool(Preset::kNoisy);
  d.raw = pool(Preset::kRaw);
  d.target = pool(Preset::kTarget);
  d.suite = eval::build_eval_suite(cfg.world_for(seed), cfg.eval_for(seed));
  return d;
}

std::vector<PoisonRow> run_poison_sweep(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  std::vector<PoisonRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedData d = make_seed_data(cfg, seed);
    const double baseline = eval::train_and_evaluate(d.raw, cfg.induced_for(seed), d.suite).id_accuracy;
    say(log, format("[poison-sweep] seed %llu no-filter baseline id_accuracy %.4f", (unsigned long long)seed, baseline));
    for (double x : cfg.sweep_fractions) {
      const Pool mix = mix_pools(d.high_quality, d.noisy, x, cfg.filter_train_size, derive_seed(seed, {5}));
      const auto dfn = clip::train_clip(mix, cfg.dfn_for(seed)).model;
      const double own = eval::evaluate(dfn, d.suite).id_accuracy;
      const auto out = induce(cfg, d, dfn);
      rows.push_back({seed, x, own, out.report.id_accuracy, out.report.average, baseline});
      say(log, format("[poison-sweep] seed %llu x=%g dfn %.4f induced %.4f", (unsigned long long)seed, x, own,
                      out.report.id_accuracy));
    }
  }
  return rows;
}

std::vector<FilterVsDownstreamRow> run_filter_vs_downstream(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  std::vector<FilterVsDownstreamRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedData d = make_seed_data(cfg, seed);
    for (std::uint64_t n : cfg.fvd_train_sizes) {
      // Ids match the preset pools, so n == filter_train_size reproduces the
      // poison-sweep mixtures.
      auto pool = [&](Preset p) { return generate_pool(cfg.preset_spec(p, seed), d.world, n, preset_id_base(p)); };
      const Pool hq = pool(Preset::kHighQuality), noisy = pool(Preset::kNoisy);
      for (double x : cfg.fvd_fractions) {
        const Pool mix = mix_pools(hq, noisy, x, n, derive_seed(seed, {5}));
        for (std::uint64_t ss : cfg.fvd_samples_seen) {
          auto tc = cfg.dfn_for(seed);
          tc.samples_seen = ss;
          const auto dfn = clip::train_clip(mix, tc).model;
          const double own = eval::evaluate(dfn, d.suite).id_accuracy;
          const auto out = induce(cfg, d, dfn);
          rows.push_back({seed, x, n, ss, own, out.report.id_accuracy, out.report.average});
          say(log, format("[filter-vs-downstream] seed %llu x=%g n=%llu samples %llu dfn %.4f induced %.4f avg %.4f",
                          (unsigned long long)seed, x, (unsigned long long)n, (unsigned long long)ss, own,
                          out.report.id_accuracy, out.report.average));
        }
      }
    }
  }
  return rows;
}

std::vector<InterventionRow> run_interventions(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  std::vector<InterventionRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedData d = make_seed_data(cfg, seed);
    auto add = [&](const std::string& name, const clip::TwoTowerModel& dfn) {
      const double own = eval::evaluate(dfn, d.suite).id_accuracy;
      auto out = induce(cfg, d, dfn);
      say(log, format("[interventions] seed %llu %s dfn %.4f induced %.4f", (unsigned long long)seed, name.c_str(), own,
                      out.report.id_accuracy));
      rows.push_back({seed, name, own, std::move(out.report)});
    };

    const auto base_cfg = cfg.dfn_for(seed);
    const auto base = clip::train_clip(d.high_quality, base_cfg).model;
    add("baseline", base);

    auto aug = base_cfg;
    const bool had_aug = base_cfg.augment_sigma > 0.0;
    aug.augment_sigma = had_aug ? 0.0 : 0.2;
    add(had_aug ? "augmentation_off" : "augmentation_on", clip::train_clip(d.high_quality, aug).model);

    for (const auto& [ss, bs] : cfg.intervention_schedules) {
      auto sc = base_cfg;
      sc.samples_seen = ss;
      sc.batch_size = bs;
      add(format("samples_%llu_batch_%u", (unsigned long long)ss, bs), clip::train_clip(d.high_quality, sc).model);
    }

    add("finetune", finetuned(cfg, d, base));

    // Pretrain on the raw pool, round-trip through the checkpoint format,
    // then train on the high-quality pool from those weights.
    auto pre = base_cfg;
    pre.samples_seen = cfg.pretrain_samples_seen;
    pre.augment_sigma = 0.0;
    pre.seed = derive_seed(seed, {7});
    const auto bytes = clip::encode_checkpoint(clip::train_clip(d.raw, pre).model);
    const auto init = clip::decode_checkpoint(bytes, "pretrained");
    add("init_from_checkpoint", clip::train_clip(d.high_quality, base_cfg, &init).model);
  }
  return rows;
}

RobustnessResult run_robustness(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  RobustnessResult result;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedData d = make_seed_data(cfg, seed);
    const auto base = clip::train_clip(d.high_quality, cfg.dfn_for(seed)).model;
    const auto tuned = finetuned(cfg, d, base);

    const auto base_out = induce(cfg, d, base);
    result.arms.push_back({seed, "baseline", base_out.report});
    result.arms.push_back({seed, "finetuned_dfn", induce(cfg, d, tuned).report});

    // Baseline induced dataset plus the labeled target data with class captions.
    auto kept = filter::apply_dfn(filter::ClipScorer{base}, filter_for(cfg, seed), d.raw, cfg.workers).kept;
    kept.append(clip::with_prototype_captions(d.target, d.world.prototype_texts()));
    result.arms.push_back({seed, "target_appended", eval::train_and_evaluate(kept, cfg.induced_for(seed), d.suite)});
    for (std::size_t i = result.arms.size() - 3; i < result.arms.size(); ++i) {
      say(log, format("[robustness] seed %llu %s id %.4f shifts %.4f", (unsigned long long)seed,
                      result.arms[i].arm.c_str(), result.arms[i].report.id_accuracy,
                      result.arms[i].report.robustness_average()));
    }

    for (double alpha : cfg.robustness_alphas) {
      const auto m = clip::interpolate_weights(base, tuned, alpha);
      result.interpolation.push_back({seed, alpha, eval::evaluate(m, d.suite)});
      say(log, format("[robustness] seed %llu alpha %g id %.4f robustness %.4f", (unsigned long long)seed, alpha,
                      result.interpolation.back().report.id_accuracy,
                      result.interpolation.back().report.robustness_average()));
    }
  }
  return result;
}

std::vector<BenchRow> run_bench_scaling(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  const std::uint64_t seed = cfg.seeds.front();
  const std::size_t largest = 4 * cfg.bench_n;
  const SyntheticSpec spec = cfg.preset_spec(Preset::kRaw, seed);
  const World world = make_world(spec);
  // Generation is not timed.
  Pool pool(spec.dims());
  pool.reserve(largest);
  const std::size_t block = 65'536;
  for (std::size_t begin = 0; begin < largest; begin += block) {
    pool.append(generate_pool(spec, world, std::min(block, largest - begin), preset_id_base(Preset::kRaw) + begin));
  }
  const filter::Scorer scorer = filter::ClipScorer{clip::TwoTowerModel::random(spec.d_img, spec.d_txt, cfg.dfn.d_emb, seed)};
  std::vector<BenchRow> rows;
  for (std::size_t n : {cfg.bench_n, 2 * cfg.bench_n, largest}) {
    const Pool part = n == largest ? Pool() : pool.slice(0, n);
    const Pool& p = n == largest ? pool : part;
    for (std::uint64_t w : cfg.bench_workers) {
      double best = 0.0;
      for (std::uint32_t r = 0; r < cfg.bench_repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto out = filter::apply_dfn(scorer, filter_for(cfg, seed), p, static_cast<unsigned>(w));
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (out.report.input_count != n) throw Error("bench: unexpected record count");
        if (r == 0 || s < best) best = s;
      }
      rows.push_back({n, static_cast<unsigned>(w), best, static_cast<double>(n) / best});
      say(log, format("[bench] records %zu workers %llu %.3f s (%.0f records/s)", n, (unsigned long long)w, best,
                      static_cast<double>(n) / best));
    }
  }
  return rows;
}

}  // namespace dfn::exp
