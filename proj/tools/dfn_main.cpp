// dfn: command-line front end for data generation, filtering, training and
// the experiment recipes. Run `dfn --help` or `dfn <command> --help`.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfn/core/error.hpp"
#include "dfn/core/parallel.hpp"
#include "dfn/exp/experiments.hpp"

namespace fs = std::filesystem;
using namespace dfn;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;

  std::string data, negatives, model, preset, kind, mode;
  std::optional<std::size_t> count;
  std::optional<double> keep_fraction;
  std::optional<double> threshold;
};

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string absolute(const std::string& p) { return p.empty() ? p : fs::absolute(p).lexically_normal().string(); }

exp::ExperimentConfig build_config(const Options& o) {
  exp::KeyValueConfig kv = o.config.empty() ? exp::KeyValueConfig{} : exp::KeyValueConfig::load(o.config);
  for (const auto& s : o.overrides) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq);
    const auto& known = exp::known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("--set: unknown key '" + key + "'");
    }
    kv.set(key, s.substr(eq + 1));
  }
  // Relative input paths in a config file are relative to that file.
  const fs::path base = o.config.empty() ? fs::current_path() : fs::absolute(o.config).parent_path();
  for (const char* key : {"input.data", "input.negatives", "input.model"}) {
    if (kv.contains(key)) {
      const std::string v = kv.get_string(key, "");
      if (!v.empty()) kv.set(key, (base / v).lexically_normal().string());
    }
  }
  if (o.seed) kv.set("seeds", std::to_string(*o.seed));
  if (o.workers) kv.set("workers", std::to_string(*o.workers));
  else if (!kv.contains("workers")) kv.set("workers", std::to_string(default_workers()));
  if (!o.data.empty()) kv.set("input.data", absolute(o.data));
  if (!o.negatives.empty()) kv.set("input.negatives", absolute(o.negatives));
  if (!o.model.empty()) kv.set("input.model", absolute(o.model));
  if (!o.preset.empty()) kv.set("gen.preset", o.preset);
  if (!o.kind.empty()) kv.set("dfn.kind", o.kind);
  if (!o.mode.empty()) kv.set("filter.mode", o.mode);
  if (o.count) kv.set("gen.count", std::to_string(*o.count));
  if (o.keep_fraction) {
    kv.set("filter.keep_fraction", shortest(*o.keep_fraction));
    kv.set("filter.threshold", "");
  }
  if (o.threshold) kv.set("filter.threshold", shortest(*o.threshold));
  auto cfg = exp::ExperimentConfig::from(kv);
  cfg.validate();
  return cfg;
}

void log_line(const std::string& s) { std::cerr << s << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data filtering network toolkit: synthetic image-text pools, filtering, CLIP-style training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dfn 1.0.0");

  Options o;
  std::function<void(const exp::ExperimentConfig&, const fs::path&)> action;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.overrides, "override one config key (key=value), repeatable");
    sub->add_option("--seed", o.seed, "run a single seed (sets `seeds`)");
    sub->add_option("--workers", o.workers, "worker threads (default: DFN_WORKERS or hardware threads)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory")->required();
  };
  auto bind = [&](CLI::App* sub, void (*fn)(const exp::ExperimentConfig&, const fs::path&, const exp::Logger&)) {
    sub->callback([&action, fn] { action = [fn](const auto& c, const auto& p) { fn(c, p, log_line); }; });
  };

  auto* gen = app.add_subcommand("gen", "generate a synthetic pool as shards + manifest");
  common(gen);
  gen->add_option("--preset", o.preset, "hq | noisy | raw | target");
  gen->add_option("--count", o.count, "records (default: preset size)");
  bind(gen, exp::cmd_gen);

  auto* train = app.add_subcommand("train-dfn", "train a data filtering network");
  common(train);
  train->add_option("--data", o.data, "training shards (directory or manifest)");
  train->add_option("--kind", o.kind, "clip | binary");
  train->add_option("--negatives", o.negatives, "negative shards for --kind binary");
  bind(train, exp::cmd_train_dfn);

  auto add_filter_opts = [&](CLI::App* sub, bool allow_threshold) {
    sub->add_option("--model", o.model, "DFN (.dfnm checkpoint or .json binary filter)");
    sub->add_option("--data", o.data, "input shards (directory or manifest)");
    auto* kf = sub->add_option("--keep-fraction", o.keep_fraction, "fraction of records to keep")
                   ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--mode", o.mode, "calibration mode: exact | reservoir");
    if (allow_threshold) {
      auto* th = sub->add_option("--threshold", o.threshold, "fixed score threshold (score > t is kept)");
      kf->excludes(th);
    }
  };

  auto* cal = app.add_subcommand("calibrate", "compute the threshold for a keep fraction");
  common(cal);
  add_filter_opts(cal, false);
  bind(cal, exp::cmd_calibrate);

  auto* filt = app.add_subcommand("filter", "apply a DFN to shards");
  common(filt);
  add_filter_opts(filt, true);
  bind(filt, exp::cmd_filter);

  auto* induce = app.add_subcommand("induce", "train a CLIP model on a (filtered) dataset and evaluate it");
  common(induce);
  induce->add_option("--data", o.data, "training shards (directory or manifest)");
  bind(induce, exp::cmd_induce);

  auto* ev = app.add_subcommand("eval", "evaluate a CLIP checkpoint on the synthetic suite");
  common(ev);
  ev->add_option("--model", o.model, ".dfnm checkpoint");
  bind(ev, exp::cmd_eval);

  auto* ex = app.add_subcommand("exp", "experiment recipes");
  ex->require_subcommand(1);
  for (auto [name, fn, help] : {
           std::tuple{"poison-sweep", exp::cmd_poison_sweep, "DFN training noise vs. induced performance"},
           std::tuple{"filter-vs-downstream", exp::cmd_filter_vs_downstream, "DFN accuracy vs. induced accuracy"},
           std::tuple{"interventions", exp::cmd_interventions, "DFN training interventions"},
           std::tuple{"robustness", exp::cmd_robustness, "fine-tuning, target data and weight interpolation"},
       }) {
    auto* sub = ex->add_subcommand(name, help);
    common(sub);
    bind(sub, fn);
  }

  auto* bench = app.add_subcommand("bench", "benchmarks");
  bench->require_subcommand(1);
  auto* scaling = bench->add_subcommand("scaling", "filter wall-clock vs. records and workers");
  common(scaling);
  bind(scaling, exp::cmd_bench_scaling);

  auto* all = app.add_subcommand("run-all", "generate, train DFN, calibrate, filter, induce, evaluate");
  common(all);
  all->add_option("--kind", o.kind, "clip | binary");
  all->add_option("--keep-fraction", o.keep_fraction, "fraction of records to keep")->check(CLI::Range(0.0, 1.0));
  bind(all, exp::cmd_run_all);

  auto* rerun = app.add_subcommand("rerun", "re-run the command recorded in a config.snapshot");
  common(rerun);
  rerun->callback([&] {
    action = [](const exp::ExperimentConfig& c, const fs::path& p) { exp::run_command(c.experiment, c, p, log_line); };
  });

  CLI11_PARSE(app, argc, argv);

  try {
    action(build_config(o), o.out);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "dfn: invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dfn: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
