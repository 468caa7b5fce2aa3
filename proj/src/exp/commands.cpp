#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dfn/core/error.hpp"
#include "dfn/core/shard_io.hpp"
#include "dfn/exp/experiments.hpp"
#include "dfn/filter/binary_filter.hpp"

namespace dfn::exp {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string join_row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_snapshot(ExperimentConfig cfg, const std::string& name, const fs::path& out) {
  cfg.experiment = name;
  write_text(out / kSnapshotName, cfg.to_kv().to_string());
}

std::uint64_t primary_seed(const ExperimentConfig& cfg) { return cfg.seeds.front(); }

const std::string& require(const std::string& value, const char* key) {
  if (value.empty()) throw ValidationError(std::string("missing input: set ") + key);
  return value;
}

Pool load_input(const std::string& dir) { return load_pool(read_manifest(dir), true); }

Json report_json(const eval::EvalReport& r) { return Json::parse(r.to_json()); }

filter::FilterConfig filter_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  auto f = cfg.filter;
  f.calibration_seed = derive_seed(seed, {6});
  return f;
}

void say(const Logger& log, const std::string& line) {
  if (log) log(line);
}

// Work shared by train-dfn and run-all. Returns the model path.
fs::path train_dfn_into(const ExperimentConfig& cfg, const Pool& data, const fs::path& out, const Logger& log) {
  const std::uint64_t seed = primary_seed(cfg);
  if (cfg.dfn_kind == "binary") {
    const Pool negatives = load_input(require(cfg.input_negatives, "input.negatives"));
    auto bc = cfg.binary;
    bc.seed = derive_seed(seed, {1});
    const auto scorer = filter::train_binary_filter(data, negatives, bc);
    const fs::path path = out / "dfn.json";
    filter::save_binary_scorer(scorer, path);
    Json j;
    j["training_accuracy"] = filter::binary_accuracy(scorer, data, negatives);
    write_json(out / "dfn_eval.json", j);
    say(log, "[train-dfn] binary filter training accuracy " + num(j["training_accuracy"].get<double>()));
    return path;
  }
  const auto result = clip::train_clip(data, cfg.dfn_for(seed));
  const fs::path path = out / "dfn.dfnm";
  clip::save_checkpoint(result.model, path);
  clip::write_train_log(result.log, out / "train_log.csv");
  const auto suite = eval::build_eval_suite(cfg.world_for(seed), cfg.eval_for(seed));
  const auto report = eval::evaluate(result.model, suite);
  write_text(out / "dfn_eval.json", report.to_json() + "\n");
  say(log, "[train-dfn] id_accuracy " + num(report.id_accuracy));
  return path;
}

class Command {
 public:
  Command(const ExperimentConfig& cfg, const std::string& name, const fs::path& out)
      : lock_((cfg.validate(), out)) {
    write_snapshot(cfg, name, out);
  }

 private:
  DirectoryLock lock_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void append_csv(const fs::path& path, const std::string& header, const std::vector<std::string>& rows) {
  const bool exists = fs::exists(path) && fs::file_size(path) > 0;
  if (exists) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (first != header) {
      throw ValidationError("CSV header mismatch in '" + path.string() + "': expected '" + header + "', found '" +
                            first + "'");
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  if (!exists) f << header << '\n';
  for (const auto& r : rows) f << r << '\n';
  if (!f) throw Error("write failed for '" + path.string() + "'");
}

void write_svg_plot(const fs::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series, bool lines) {
  constexpr double W = 640, H = 420, L = 70, R = 170, T = 40, B = 55;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.05, y1 += 0.05;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    o << "<text x=\"" << px(sx(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << label(xv)
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << px(sy(yv) + 4) << "\" text-anchor=\"end\">" << label(yv) << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << px(sy(yv)) << "\" x2=\"" << W - R << "\" y2=\"" << px(sy(yv))
      << "\" stroke=\"#ddd\"/>\n";
  }
  o << "<text x=\"" << px((L + W - R) / 2) << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << esc(x_label)
    << "</text>\n";
  o << "<text transform=\"translate(16," << px((T + H - B) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << esc(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    const auto& s = series[i];
    if (lines && s.points.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (auto [x, y] : s.points) o << px(sx(x)) << ',' << px(sy(y)) << ' ';
      o << "\"/>\n";
    }
    for (auto [x, y] : s.points) {
      o << "<circle cx=\"" << px(sx(x)) << "\" cy=\"" << px(sy(y)) << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = T + 10 + 18.0 * static_cast<double>(i);
    o << "<rect x=\"" << W - R + 12 << "\" y=\"" << px(ly - 9) << "\" width=\"12\" height=\"12\" fill=\"" << color
      << "\"/>\n";
    o << "<text x=\"" << W - R + 30 << "\" y=\"" << px(ly + 1) << "\">" << esc(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  write_text(path, o.str());
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / kLockName) {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error("output directory '" + dir.string() + "' is locked by another run (remove " + kLockName +
                  " if no run is active)");
    }
    throw Error("cannot create lock '" + path_.string() + "': " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

filter::Scorer load_scorer(const fs::path& path) {
  const auto ext = path.extension();
  if (ext == ".dfnm") return filter::ClipScorer{clip::load_checkpoint(path)};
  if (ext == ".json") return filter::load_binary_scorer(path);
  throw ValidationError("unknown model type '" + path.string() + "' (expected .dfnm or .json)");
}

void cmd_gen(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  Command cmd(cfg, "gen", out);
  const std::uint64_t seed = primary_seed(cfg);
  const std::size_t n = cfg.gen_count ? cfg.gen_count : cfg.preset_size(cfg.gen_preset);
  const auto set = generate_shards(cfg.preset_spec(cfg.gen_preset, seed), n, preset_id_base(cfg.gen_preset), out,
                                   cfg.records_per_shard, cfg.workers);
  say(log, "[gen] " + std::to_string(set.total_records) + " " + std::string(to_string(cfg.gen_preset)) +
               " records in " + std::to_string(set.shards.size()) + " shards");
}

void cmd_train_dfn(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  const Pool data = load_input(require(cfg.input_data, "input.data"));
  Command cmd(cfg, "train-dfn", out);
  train_dfn_into(cfg, data, out, log);
}

void cmd_calibrate(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  if (cfg.filter.threshold) throw ValidationError("calibrate needs filter.keep_fraction, not filter.threshold");
  const auto scorer = load_scorer(require(cfg.input_model, "input.model"));
  const Pool data = load_input(require(cfg.input_data, "input.data"));
  Command cmd(cfg, "calibrate", out);
  const auto fc = filter_for(cfg, primary_seed(cfg));
  const auto scores = filter::score_pool(scorer, data);
  const float t = filter::resolve_threshold(fc, scores);
  const auto kept = std::count_if(scores.begin(), scores.end(), [t](float s) { return s > t; });
  Json j;
  j["threshold"] = t;
  j["keep_fraction"] = fc.keep_fraction;
  j["mode"] = fc.mode_name();
  j["input_count"] = data.size();
  j["kept_count"] = kept;
  write_json(out / "calibration.json", j);
  say(log, "[calibrate] threshold " + num(t) + " keeps " + std::to_string(kept) + " of " +
               std::to_string(data.size()));
}

void cmd_filter(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  const auto scorer = load_scorer(require(cfg.input_model, "input.model"));
  const auto input = read_manifest(require(cfg.input_data, "input.data"));
  // Checked before the snapshot is written so the input directory is untouched.
  if (fs::exists(out) && fs::equivalent(out, input.root)) {
    throw ValidationError("output directory '" + out.string() + "' is the input shard directory");
  }
  Command cmd(cfg, "filter", out);
  const auto result = filter::apply_dfn(scorer, filter_for(cfg, primary_seed(cfg)), input, out, cfg.workers);
  write_text(out / "filter_report.json", result.report.to_json() + "\n");
  write_text(out / "timings.json", result.report.timings_json() + "\n");
  say(log, "[filter] kept " + std::to_string(result.report.kept_count) + " of " +
               std::to_string(result.report.input_count) + " at threshold " + num(result.report.threshold));
}

void cmd_induce(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  const Pool data = load_input(require(cfg.input_data, "input.data"));
  Command cmd(cfg, "induce", out);
  const std::uint64_t seed = primary_seed(cfg);
  const auto result = clip::train_clip(data, cfg.induced_for(seed));
  clip::save_checkpoint(result.model, out / "induced.dfnm");
  clip::write_train_log(result.log, out / "train_log.csv");
  const auto report = eval::evaluate(result.model, eval::build_eval_suite(cfg.world_for(seed), cfg.eval_for(seed)));
  write_text(out / "eval_report.json", report.to_json() + "\n");
  say(log, "[induce] trained on " + std::to_string(data.size()) + " records, id_accuracy " + num(report.id_accuracy));
}

void cmd_eval(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  const auto model = clip::load_checkpoint(require(cfg.input_model, "input.model"));
  Command cmd(cfg, "eval", out);
  const std::uint64_t seed = primary_seed(cfg);
  const auto report = eval::evaluate(model, eval::build_eval_suite(cfg.world_for(seed), cfg.eval_for(seed)));
  write_text(out / "eval_report.json", report.to_json() + "\n");
  say(log, "[eval] id_accuracy " + num(report.id_accuracy) + " average " + num(report.average));
}

void cmd_poison_sweep(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  Command cmd(cfg, "poison-sweep", out);
  const auto rows = run_poison_sweep(cfg, log);
  std::vector<std::string> lines;
  std::vector<Series> series;
  for (const auto& r : rows) {
    lines.push_back(join_row({std::to_string(r.seed), num(r.unfiltered_fraction), num(r.dfn_id_accuracy),
                              num(r.induced_id_accuracy), num(r.average), num(r.baseline_id_accuracy)}));
    const std::string name = "seed " + std::to_string(r.seed);
    if (series.empty() || series.back().name != name) {
      series.push_back({name, {}});
      series.push_back({name + " no filter", {}});
    }
    series[series.size() - 2].points.emplace_back(r.unfiltered_fraction, r.induced_id_accuracy);
    series.back().points.emplace_back(r.unfiltered_fraction, r.baseline_id_accuracy);
  }
  append_csv(out / "poison_sweep.csv", kPoisonHeader, lines);
  write_svg_plot(out / "poison_sweep.svg", "Induced model vs. DFN training noise", "unfiltered fraction in DFN data",
                 "induced ID accuracy", series);
}

void cmd_filter_vs_downstream(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  Command cmd(cfg, "filter-vs-downstream", out);
  const auto rows = run_filter_vs_downstream(cfg, log);
  std::vector<std::string> lines;
  std::vector<Series> series;
  for (const auto& r : rows) {
    lines.push_back(join_row({std::to_string(r.seed), num(r.unfiltered_fraction), std::to_string(r.train_size),
                              std::to_string(r.samples_seen),
                              num(r.dfn_id_accuracy), num(r.induced_id_accuracy), num(r.average)}));
    const std::string name = "x=" + num(r.unfiltered_fraction) + " n=" + std::to_string(r.train_size);
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
    if (it == series.end()) it = series.insert(series.end(), {name, {}});
    it->points.emplace_back(r.dfn_id_accuracy, r.average);
  }
  append_csv(out / "filter_vs_downstream.csv", kFilterVsDownstreamHeader, lines);
  write_svg_plot(out / "filter_vs_downstream.svg", "DFN accuracy vs. induced accuracy", "DFN ID accuracy",
                 "induced average", series, false);
}

void cmd_interventions(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  Command cmd(cfg, "interventions", out);
  const auto rows = run_interventions(cfg, log);
  std::vector<std::string> lines;
  for (const auto& r : rows) {
    double shift = 0.0;
    for (const auto& [name, acc] : r.induced.shift_accuracies) shift += acc;
    if (!r.induced.shift_accuracies.empty()) shift /= static_cast<double>(r.induced.shift_accuracies.size());
    lines.push_back(join_row({std::to_string(r.seed), r.intervention, num(r.dfn_id_accuracy),
                              num(r.induced.id_accuracy), num(shift), num(r.induced.recall_i2t),
                              num(r.induced.recall_t2i), num(r.induced.average)}));
  }
  append_csv(out / "interventions.csv", kInterventionHeader, lines);
}

void cmd_robustness(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  Command cmd(cfg, "robustness", out);
  const auto result = run_robustness(cfg, log);
  std::vector<std::string> arms;
  for (const auto& a : result.arms) {
    arms.push_back(join_row({std::to_string(a.seed), a.arm, num(a.report.id_accuracy), "id", num(a.report.id_accuracy)}));
    for (const auto& [name, acc] : a.report.shift_accuracies) {
      arms.push_back(join_row({std::to_string(a.seed), a.arm, num(a.report.id_accuracy), name, num(acc)}));
    }
  }
  append_csv(out / "robustness.csv", kRobustnessHeader, arms);

  std::vector<std::string> interp;
  std::vector<Series> series;
  for (const auto& r : result.interpolation) {
    interp.push_back(join_row({std::to_string(r.seed), num(r.alpha), num(r.report.id_accuracy),
                               num(r.report.robustness_average()), num(r.report.average)}));
    const std::string name = "seed " + std::to_string(r.seed);
    if (series.empty() || series.back().name != name) series.push_back({name, {}});
    series.back().points.emplace_back(r.report.id_accuracy, r.report.robustness_average());
  }
  append_csv(out / "interpolation.csv", kInterpolationHeader, interp);
  write_svg_plot(out / "interpolation.svg", "Weight interpolation: base to fine-tuned DFN", "ID accuracy",
                 "mean of ID and shift accuracy", series);
}

void cmd_bench_scaling(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  Command cmd(cfg, "bench-scaling", out);
  const auto rows = run_bench_scaling(cfg, log);
  std::vector<std::string> lines;
  std::vector<Series> series;
  for (const auto& r : rows) {
    lines.push_back(join_row({std::to_string(r.records), std::to_string(r.workers), num(r.seconds),
                              num(r.records_per_second)}));
    const std::string name = std::to_string(r.workers) + " workers";
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
    if (it == series.end()) it = series.insert(series.end(), {name, {}});
    it->points.emplace_back(static_cast<double>(r.records), r.seconds);
  }
  append_csv(out / "bench_scaling.csv", kBenchHeader, lines);
  write_svg_plot(out / "bench_scaling.svg", "Filter wall-clock time", "records", "seconds", series);
}

void cmd_run_all(const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  Command cmd(cfg, "run-all", out);
  const std::uint64_t seed = primary_seed(cfg);

  auto gen = [&](Preset p, const char* dir) {
    const auto set = generate_shards(cfg.preset_spec(p, seed), cfg.preset_size(p), preset_id_base(p), out / dir,
                                     cfg.records_per_shard, cfg.workers);
    say(log, "[run-all] generated " + std::to_string(set.total_records) + " records into " + dir + "/");
    return set;
  };
  const auto hq = gen(Preset::kHighQuality, "hq");
  const auto raw = gen(Preset::kRaw, "raw");

  // The binary kind needs negatives; the raw pool serves.
  ExperimentConfig dfn_cfg = cfg;
  if (dfn_cfg.dfn_kind == "binary" && dfn_cfg.input_negatives.empty()) {
    dfn_cfg.input_negatives = fs::absolute(out / "raw").string();
  }
  fs::create_directories(out / "dfn");
  const auto model_path = train_dfn_into(dfn_cfg, load_pool(hq, true), out / "dfn", log);
  const auto scorer = load_scorer(model_path);

  const auto fc = filter_for(cfg, seed);
  const Pool raw_pool = load_pool(raw, true);
  const float threshold = filter::resolve_threshold(fc, filter::score_pool(scorer, raw_pool));
  {
    Json j;
    j["threshold"] = threshold;
    j["keep_fraction"] = fc.keep_fraction;
    j["mode"] = fc.mode_name();
    j["input_count"] = raw_pool.size();
    write_json(out / "calibration.json", j);
  }

  // The sharded filter recomputes the same threshold from the same scores.
  const auto filtered = filter::apply_dfn(scorer, fc, raw, out / "filtered", cfg.workers);
  write_text(out / "filtered" / "filter_report.json", filtered.report.to_json() + "\n");
  write_text(out / "filtered" / "timings.json", filtered.report.timings_json() + "\n");
  say(log, "[run-all] kept " + std::to_string(filtered.report.kept_count) + " of " +
               std::to_string(filtered.report.input_count));

  const auto suite = eval::build_eval_suite(cfg.world_for(seed), cfg.eval_for(seed));
  fs::create_directories(out / "induced");
  const auto induced = clip::train_clip(load_pool(filtered.output, true), cfg.induced_for(seed));
  clip::save_checkpoint(induced.model, out / "induced" / "induced.dfnm");
  clip::write_train_log(induced.log, out / "induced" / "train_log.csv");
  const auto induced_report = eval::evaluate(induced.model, suite);
  write_text(out / "induced" / "eval_report.json", induced_report.to_json() + "\n");
  say(log, "[run-all] induced id_accuracy " + num(induced_report.id_accuracy));

  const auto baseline = eval::train_and_evaluate(raw_pool, cfg.induced_for(seed), suite);
  say(log, "[run-all] no-filter baseline id_accuracy " + num(baseline.id_accuracy));

  Json report;
  report["seed"] = seed;
  report["dfn_kind"] = cfg.dfn_kind;
  report["dfn"] = Json::parse(read_text(out / "dfn" / "dfn_eval.json"));
  report["threshold"] = threshold;
  report["filter"] = Json::parse(filtered.report.to_json());
  report["induced"] = report_json(induced_report);
  report["no_filter_baseline"] = report_json(baseline);
  write_json(out / "report.json", report);
}

void run_command(const std::string& name, const ExperimentConfig& cfg, const fs::path& out, const Logger& log) {
  using Fn = void (*)(const ExperimentConfig&, const fs::path&, const Logger&);
  static const std::pair<const char*, Fn> table[] = {
      {"gen", cmd_gen},
      {"train-dfn", cmd_train_dfn},
      {"calibrate", cmd_calibrate},
      {"filter", cmd_filter},
      {"induce", cmd_induce},
      {"eval", cmd_eval},
      {"poison-sweep", cmd_poison_sweep},
      {"filter-vs-downstream", cmd_filter_vs_downstream},
      {"interventions", cmd_interventions},
      {"robustness", cmd_robustness},
      {"bench-scaling", cmd_bench_scaling},
      {"run-all", cmd_run_all},
  };
  for (const auto& [n, fn] : table) {
    if (name == n) return fn(cfg, out, log);
  }
  throw ValidationError("unknown experiment '" + name + "'");
}

}  // namespace dfn::exp
