// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   acceptance                 all criteria
//   acceptance --criterion 4   one criterion (repeatable)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dfn/clip/loss.hpp"
#include "dfn/core/error.hpp"
#include "dfn/core/shard_io.hpp"
#include "dfn/exp/experiments.hpp"
#include "dfn/filter/calibrate.hpp"
#include "support.hpp"

using namespace dfn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string f(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double points(double acc) { return 100.0 * acc; }

// Process CPU seconds.
double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

// ---- 1: gradients vs. 64-bit central differences --------------------------

std::vector<double> unit_rows(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<double> m(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      m[i * d + j] = rng.normal();
      s += m[i * d + j] * m[i * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) m[i * d + j] /= std::sqrt(s);
  }
  return m;
}

// Symmetric InfoNCE written out directly (log-sum-exp per row and column).
double reference_loss(const std::vector<double>& I, const std::vector<double>& T, std::size_t n, std::size_t d,
                      double log_scale) {
  const double s = std::exp(log_scale);
  std::vector<double> z(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += I[i * d + k] * T[j * d + k];
      z[i * n + j] = s * acc;
    }
  auto lse = [](const std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - mx);
    return mx + std::log(sum);
  };
  double rows = 0.0, cols = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(z.begin() + i * n, z.begin() + (i + 1) * n), c(n);
    for (std::size_t k = 0; k < n; ++k) c[k] = z[k * n + i];
    rows += lse(r) - z[i * n + i];
    cols += lse(c) - z[i * n + i];
  }
  return (rows + cols) / (2.0 * n);
}

Outcome gradients() {
  const double t0 = cpu_seconds();
  Rng pick(2024);
  const int configs = 25;
  double worst = 0.0;
  for (int c = 0; c < configs; ++c) {
    const std::size_t n = 2 + pick.below(15), d = 2 + pick.below(31);
    Rng rng(derive_seed(77, {static_cast<std::uint64_t>(c)}));
    auto I = unit_rows(n, d, rng), T = unit_rows(n, d, rng);
    const double ls = std::log(1.0 + 20.0 * rng.uniform());
    const auto r = clip::contrastive_loss<double>(I, T, n, d, ls);
    const double h = 1e-5;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-8, std::max(std::abs(a), std::abs(b))); };
    auto fd = [&](std::vector<double>& v, std::size_t k) {
      const double saved = v[k];
      v[k] = saved + h;
      const double up = reference_loss(I, T, n, d, ls);
      v[k] = saved - h;
      const double down = reference_loss(I, T, n, d, ls);
      v[k] = saved;
      return (up - down) / (2 * h);
    };
    // Components whose magnitude is at finite-difference noise level are
    // compared absolutely.
    auto err = [&](double a, double b) { return std::max(std::abs(a), std::abs(b)) < 1e-6 ? std::abs(a - b) : rel(a, b); };
    for (std::size_t k = 0; k < n * d; ++k) {
      worst = std::max(worst, err(r.grad_image[k], fd(I, k)));
      worst = std::max(worst, err(r.grad_text[k], fd(T, k)));
    }
    const double gl = (reference_loss(I, T, n, d, ls + h) - reference_loss(I, T, n, d, ls - h)) / (2 * h);
    worst = std::max(worst, err(r.grad_log_scale, gl));
  }
  const double secs = cpu_seconds() - t0;
  return {worst <= 1e-4 && secs < 10.0,
          f("%d random (N, d) configs, worst relative error %.2e (need <= 1e-4), %.1f s (need < 10)", configs, worst,
            secs)};
}

// ---- 2: calibration vs. a sort oracle ---------------------------------------

float sort_oracle(std::vector<float> s, double keep) {
  std::sort(s.begin(), s.end(), std::greater<>());
  const std::size_t m = static_cast<std::size_t>(std::floor(keep * static_cast<double>(s.size())));
  if (m >= s.size()) return std::nextafter(s.back(), -std::numeric_limits<float>::infinity());
  return s[m];
}

Outcome calibration() {
  const double t0 = cpu_seconds();
  Rng rng(5);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = trial == 0 ? 100'000 : 1 + rng.below(100'000);
    const double keep = trial % 10 == 0 ? 1.0 : 0.001 + 0.998 * rng.uniform();
    std::vector<float> s(n);
    // Every fourth list is coarsely quantized to force ties.
    for (float& v : s) v = trial % 4 == 0 ? std::round(static_cast<float>(rng.normal()) * 8.0f) / 8.0f
                                          : static_cast<float>(rng.normal());
    if (filter::calibrate_threshold(s, keep, filter::CalibrationMode::kExact) != sort_oracle(s, keep)) ++mismatches;
  }
  std::vector<float> big(1'000'000);
  for (float& v : big) v = static_cast<float>(rng.normal());
  double worst_err = 0.0;
  for (double keep : {0.05, 0.15, 0.5, 0.9}) {
    const float t = filter::calibrate_threshold(big, keep, filter::CalibrationMode::kReservoir, 100'000, 11);
    const auto kept = std::count_if(big.begin(), big.end(), [t](float v) { return v > t; });
    worst_err = std::max(worst_err, std::abs(static_cast<double>(kept) / big.size() - keep));
  }
  const double secs = cpu_seconds() - t0;
  return {mismatches == 0 && worst_err <= 0.01 && secs < 30.0,
          f("exact: %d/100 lists differ from sort oracle; reservoir (1e6 scores, capacity 1e5): worst kept-fraction "
            "error %.4f (need <= 0.01); %.1f s (need < 30)",
            mismatches, worst_err, secs)};
}

// ---- 3: apply_dfn vs. sequential brute force --------------------------------

Outcome pipeline() {
  const double t0 = cpu_seconds();
  Rng rng(8);
  int brute_failures = 0, idem_failures = 0, mono_failures = 0, score_failures = 0;
  const int pools = 50;
  for (int trial = 0; trial < pools; ++trial) {
    const Dims dims{static_cast<std::uint32_t>(4 + rng.below(29)), static_cast<std::uint32_t>(4 + rng.below(29))};
    const auto model = clip::TwoTowerModel::random(dims.image, dims.text, 4 + static_cast<std::uint32_t>(rng.below(13)),
                                                   rng.next());
    const filter::Scorer scorer = filter::ClipScorer{model};
    const Pool pool = test::random_pool(100 + rng.below(5000), dims, rng.next(), rng.next() >> 8);
    const float t = static_cast<float>(0.4 * (rng.uniform() - 0.5));

    std::vector<std::uint64_t> expected;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const float s = filter::score_alignment(scorer, pool[i]);
      if (std::abs(s - test::reference_cosine(model, pool[i])) > 1e-5) ++score_failures;
      if (s > t) expected.push_back(pool[i].id);
    }
    const std::size_t chunk = 1 + rng.below(2000);
    for (unsigned w : {1u, 2u, 8u}) {
      const auto kept = filter::apply_dfn(scorer, filter::FilterConfig::fixed(t), pool, w, chunk).kept;
      if (!std::equal(kept.ids().begin(), kept.ids().end(), expected.begin(), expected.end())) ++brute_failures;
    }
    const auto once = filter::apply_dfn(scorer, filter::FilterConfig::fixed(t), pool, 2, chunk).kept;
    if (filter::apply_dfn(scorer, filter::FilterConfig::fixed(t), once, 2, chunk).kept != once) ++idem_failures;
    const float t2 = t + static_cast<float>(0.3 * rng.uniform());
    const auto tighter = filter::apply_dfn(scorer, filter::FilterConfig::fixed(t2), pool, 8, chunk).kept;
    std::vector<std::uint64_t> a(once.ids().begin(), once.ids().end()), b(tighter.ids().begin(), tighter.ids().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (!std::includes(a.begin(), a.end(), b.begin(), b.end())) ++mono_failures;
  }
  const double secs = cpu_seconds() - t0;
  return {brute_failures + idem_failures + mono_failures + score_failures == 0 && secs < 60.0,
          f("%d random pools: brute-force mismatches %d (workers 1/2/8), idempotence failures %d, monotonicity "
            "failures %d, score vs double reference > 1e-5: %d; %.1f s (need < 60)",
            pools, brute_failures, idem_failures, mono_failures, score_failures, secs)};
}

// ---- 4, 5: poison sweep -----------------------------------------------------

Outcome induced_vs_baseline() {
  const double t0 = cpu_seconds();
  exp::ExperimentConfig cfg;
  cfg.sweep_fractions = {0.0};
  const auto rows = exp::run_poison_sweep(cfg);
  bool ok = rows.size() == cfg.seeds.size();
  std::string per;
  for (const auto& r : rows) {
    const double gain = points(r.induced_id_accuracy - r.baseline_id_accuracy);
    ok = ok && gain >= 5.0;
    per += f("seed %llu %.1f vs %.1f (%+.1f); ", (unsigned long long)r.seed, points(r.induced_id_accuracy),
             points(r.baseline_id_accuracy), gain);
  }
  const double secs = cpu_seconds() - t0;
  return {ok && secs < 600.0, per + f("need >= +5.0 on every seed; %.0f s CPU (need < 600)", secs)};
}

Outcome poison_sweep() {
  const double t0 = cpu_seconds();
  exp::ExperimentConfig cfg;
  const auto rows = exp::run_poison_sweep(cfg);
  bool ok = !rows.empty();
  std::string per;
  for (std::uint64_t seed : cfg.seeds) {
    std::vector<exp::PoisonRow> s;
    for (const auto& r : rows)
      if (r.seed == seed) s.push_back(r);
    std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.unfiltered_fraction < b.unfiltered_fraction; });
    const bool ends = !s.empty() && s.front().unfiltered_fraction == 0.0 && s.back().unfiltered_fraction == 1.0;
    double worst_rise = -INFINITY;
    for (std::size_t i = 1; i < s.size(); ++i) {
      worst_rise = std::max(worst_rise, points(s[i].induced_id_accuracy - s[i - 1].induced_id_accuracy));
    }
    const double drop = ends ? points(s.front().induced_id_accuracy - s.back().induced_id_accuracy) : 0.0;
    ok = ok && ends && drop >= 5.0 && worst_rise <= 1.0;
    per += f("seed %llu [", (unsigned long long)seed);
    for (std::size_t i = 0; i < s.size(); ++i) per += f(i ? " %.1f" : "%.1f", points(s[i].induced_id_accuracy));
    per += f("] drop %.1f, worst step rise %+.1f; ", drop, worst_rise);
  }
  const double secs = cpu_seconds() - t0;
  return {ok && secs < 1200.0,
          per + f("need drop >= 5.0 and step rise <= 1.0; %.0f s CPU (need < 1200)", secs)};
}

// ---- 6: filter-vs-downstream existence --------------------------------------

Outcome filter_vs_downstream() {
  const double t0 = cpu_seconds();
  exp::ExperimentConfig cfg;
  const auto rows = exp::run_filter_vs_downstream(cfg);
  // Pairs are compared within a seed; filtering performance is the induced
  // model's average metric.
  int pairs = 0;
  double widest = -1.0;
  std::string example;
  for (const auto& a : rows)
    for (const auto& b : rows) {
      if (a.seed != b.seed || !(a.dfn_id_accuracy < b.dfn_id_accuracy) || !(a.average >= b.average)) continue;
      ++pairs;
      const double gap = b.dfn_id_accuracy - a.dfn_id_accuracy;
      if (gap <= widest) continue;
      widest = gap;
      example = f("seed %llu: DFN (x=%g, n=%llu, %llu samples) own %.2f, induced avg %.2f vs DFN (x=%g, n=%llu, "
                  "%llu samples) own %.2f, induced avg %.2f",
                  (unsigned long long)a.seed, a.unfiltered_fraction, (unsigned long long)a.train_size,
                  (unsigned long long)a.samples_seen, points(a.dfn_id_accuracy), points(a.average),
                  b.unfiltered_fraction, (unsigned long long)b.train_size, (unsigned long long)b.samples_seen,
                  points(b.dfn_id_accuracy), points(b.average));
    }
  const double secs = cpu_seconds() - t0;
  return {pairs > 0 && secs < 1200.0,
          f("%zu grid points, %d qualifying pairs", rows.size(), pairs) + (pairs ? "; widest: " + example : "") +
              f("; %.0f s CPU (need < 1200)", secs)};
}

// ---- 7: fine-tuning intervention --------------------------------------------

Outcome finetune_gain() {
  exp::ExperimentConfig cfg;
  bool ok = true;
  std::string per;
  for (std::uint64_t seed : cfg.seeds) {
    const auto d = exp::make_seed_data(cfg, seed);
    const auto base = clip::train_clip(d.high_quality, cfg.dfn_for(seed)).model;
    const auto tuned = clip::finetune(base, d.target, d.world.prototype_texts(), cfg.finetune_for(seed)).model;
    auto filt = cfg.filter;
    filt.calibration_seed = derive_seed(seed, {6});
    const auto a = eval::filtering_performance(filter::ClipScorer{base}, filt, d.raw, cfg.induced_for(seed), d.suite, 1);
    const auto b = eval::filtering_performance(filter::ClipScorer{tuned}, filt, d.raw, cfg.induced_for(seed), d.suite, 1);
    const double gain = points(b.report.id_accuracy - a.report.id_accuracy);
    ok = ok && gain >= 2.0;
    per += f("seed %llu %.1f -> %.1f (%+.1f); ", (unsigned long long)seed, points(a.report.id_accuracy),
             points(b.report.id_accuracy), gain);
  }
  return {ok, per + "need >= +2.0 on every seed"};
}

// ---- 8: weight interpolation ------------------------------------------------

double max_abs_diff(const clip::TwoTowerModel& a, const clip::TwoTowerModel& b) {
  double m = std::abs(double(a.log_temperature) - b.log_temperature);
  auto cmp = [&](const std::vector<float>& x, const std::vector<float>& y) {
    if (x.size() != y.size()) m = INFINITY;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) m = std::max(m, std::abs(double(x[i]) - y[i]));
  };
  cmp(a.w_img, b.w_img);
  cmp(a.b_img, b.b_img);
  cmp(a.w_txt, b.w_txt);
  cmp(a.b_txt, b.b_txt);
  return m;
}

Outcome interpolation() {
  exp::ExperimentConfig cfg;
  // Endpoints on random models of several shapes.
  double endpoint_err = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = clip::TwoTowerModel::random(8 + s, 5 + s, 3 + s, s), b = clip::TwoTowerModel::random(8 + s, 5 + s, 3 + s, 100 + s);
    endpoint_err = std::max({endpoint_err, max_abs_diff(clip::interpolate_weights(a, b, 0.0), a),
                             max_abs_diff(clip::interpolate_weights(a, b, 1.0), b)});
  }
  const auto result = exp::run_robustness(cfg);
  bool ok = endpoint_err <= 1e-7;
  std::string per;
  for (std::uint64_t seed : cfg.seeds) {
    std::vector<std::pair<double, double>> curve;  // alpha, mean of id + shifts
    for (const auto& r : result.interpolation)
      if (r.seed == seed) curve.emplace_back(r.alpha, r.report.robustness_average());
    std::sort(curve.begin(), curve.end());
    if (curve.size() < 2 || curve.front().first != 0.0 || curve.back().first != 1.0) {
      ok = false;
      continue;
    }
    const double bar = std::max(curve.front().second, curve.back().second) - 0.005;
    bool any = false, interior = false;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const bool meets = curve[i].second >= bar;
      any = any || meets;
      if (i > 0 && i + 1 < curve.size()) interior = interior || meets;
    }
    ok = ok && any;
    per += f("seed %llu [", (unsigned long long)seed);
    for (std::size_t i = 0; i < curve.size(); ++i) per += f(i ? " %.1f" : "%.1f", points(curve[i].second));
    per += f("] interior alpha meets bar: %s; ", interior ? "yes" : "no");
  }
  return {ok, f("endpoint max |diff| %.1e (need <= 1e-7); robustness average over alpha 0..1: ", endpoint_err) + per +
                  "need some alpha >= max(endpoints) - 0.5"};
}

// ---- 9: scaling --------------------------------------------------------------

Outcome scaling() {
  exp::ExperimentConfig cfg;
  const auto rows = exp::run_bench_scaling(cfg);
  std::map<std::pair<std::size_t, unsigned>, double> t;
  for (const auto& r : rows) t[{r.records, r.workers}] = r.seconds;
  const std::size_t n = cfg.bench_n, big = 4 * n;
  double worst_ratio = 0.0;
  for (unsigned w : {1u, 4u}) {
    worst_ratio = std::max({worst_ratio, t[{2 * n, w}] / t[{n, w}], t[{big, w}] / t[{2 * n, w}]});
  }
  const double speedup = t[{big, 1u}] / t[{big, 4u}];
  const bool ok = big >= 1'000'000 && worst_ratio <= 2.5 && speedup >= 2.0;
  return {ok, f("n = %zu: worst time ratio per doubling %.2f (need <= 2.5); %zu records: workers 4 speedup %.2fx "
                "(need >= 2); %u hardware threads",
                n, worst_ratio, big, speedup, std::thread::hardware_concurrency())};
}

// ---- 10: determinism and formats --------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name != "timings.json" && name != exp::kLockName)
      out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

Outcome determinism() {
  test::TempDir tmp("acceptance");
  exp::ExperimentConfig c;
  c.seeds = {11};
  c.filter_train_size = 3000;
  c.raw_size = 30'000;
  c.target_size = 2000;
  c.records_per_shard = 4096;
  c.dfn.samples_seen = c.induced.samples_seen = 20'000;
  c.finetune.samples_seen = 5000;
  c.pretrain_samples_seen = 10'000;
  c.eval.id_size = 1000;
  c.sweep_fractions = {0.0, 1.0};
  c.fvd_train_sizes = {1000, 3000};
  c.fvd_samples_seen = {5000, 20'000};
  c.intervention_schedules = {{10'000, 128}};
  c.workers = 3;

  std::vector<std::string> failed;
  std::size_t files = 0;
  auto rerun = [&](const std::string& name, const exp::ExperimentConfig& cfg) {
    const auto a = tmp / (name + "-a"), b = tmp / (name + "-b");
    exp::run_command(name, cfg, a);
    const auto snap = exp::ExperimentConfig::from(exp::KeyValueConfig::load(a / exp::kSnapshotName));
    exp::run_command(snap.experiment, snap, b);
    const auto ta = tree(a), tb = tree(b);
    files += ta.size();
    if (ta != tb) failed.push_back(name);
  };
  c.gen_preset = exp::Preset::kHighQuality;
  rerun("gen", c);
  c.gen_preset = exp::Preset::kRaw;
  exp::run_command("gen", c, tmp / "raw");
  c.input_data = (tmp / "gen-a").string();
  rerun("train-dfn", c);
  c.input_model = (tmp / "train-dfn-a" / "dfn.dfnm").string();
  c.input_data = (tmp / "raw").string();
  rerun("calibrate", c);
  rerun("filter", c);
  c.input_data = (tmp / "filter-a").string();
  rerun("induce", c);
  c.input_model = (tmp / "induce-a" / "induced.dfnm").string();
  rerun("eval", c);
  for (const char* name : {"poison-sweep", "filter-vs-downstream", "interventions", "robustness", "run-all"}) rerun(name, c);

  // Shard round trip, including checksum verification.
  const Pool pool = test::random_pool(1234, {17, 9}, 4, 99);
  const auto set = write_shards(pool, tmp / "rt", 100);
  const bool round_trip = load_pool(read_manifest(tmp / "rt"), true) == pool && set.shards.size() == 13;

  // Corrupt headers must be rejected with the matching error kind.
  auto bytes = encode_shard(pool.slice(0, 5));
  auto rejects = [&](std::vector<std::uint8_t> b, ShardError::Kind kind) {
    try {
      decode_shard(b, "corrupt");
    } catch (const ShardError& e) {
      return e.kind() == kind;
    }
    return false;
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  auto bad_version = bytes;
  bad_version[4] = 2;
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  auto short_header = bytes;
  short_header.resize(10);
  const bool corrupt = rejects(bad_magic, ShardError::Kind::kBadMagic) &&
                       rejects(bad_version, ShardError::Kind::kVersionMismatch) &&
                       rejects(truncated, ShardError::Kind::kTruncated) &&
                       rejects(short_header, ShardError::Kind::kTruncated);

  std::string names;
  for (const auto& n : failed) names += " " + n;
  return {failed.empty() && round_trip && corrupt,
          f("12 commands re-run from snapshot, %zu files compared, differing commands:%s; shard round trip %s; "
            "corrupt headers rejected %s",
            files, failed.empty() ? " none" : names.c_str(), round_trip ? "ok" : "FAILED", corrupt ? "ok" : "FAILED")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--criterion", only, "run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "gradient correctness", gradients},
      {2, "calibration oracle", calibration},
      {3, "pipeline correctness", pipeline},
      {4, "clean DFN beats no-filter baseline", induced_vs_baseline},
      {5, "poison sweep", poison_sweep},
      {6, "filter-vs-downstream existence", filter_vs_downstream},
      {7, "fine-tuning intervention", finetune_gain},
      {8, "weight interpolation", interpolation},
      {9, "scaling", scaling},
      {10, "determinism and formats", determinism},
  };
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s | %s | %.1f s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), wall);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
