#pragma once

// Experiment recipes. Each `run_*` computes its table in memory; each
// `cmd_*` runs the recipe and writes CSV / JSON / SVG plus a config
// snapshot into an output directory it locks for the duration.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dfn/clip/model.hpp"
#include "dfn/eval/evaluate.hpp"
#include "dfn/exp/config.hpp"

namespace dfn::exp {

// Progress lines ("[poison-sweep] seed 1 x=0.2 ..."); may be empty.
using Logger = std::function<void(const std::string&)>;

// Pools and eval suite for one seed, built from the config presets.
struct SeedData {
  std::uint64_t seed = 0;
  World world;
  Pool high_quality;
  Pool noisy;
  Pool raw;
  Pool target;
  eval::EvalSuite suite;
};

SeedData make_seed_data(const ExperimentConfig& cfg, std::uint64_t seed);

struct PoisonRow {
  std::uint64_t seed;
  double unfiltered_fraction;
  double dfn_id_accuracy;
  double induced_id_accuracy;
  double average;
  double baseline_id_accuracy;  // no-filter model, same seed
};

struct FilterVsDownstreamRow {
  std::uint64_t seed;
  double unfiltered_fraction;
  std::uint64_t train_size;
  std::uint64_t samples_seen;
  double dfn_id_accuracy;
  double induced_id_accuracy;
  double average;
};

struct InterventionRow {
  std::uint64_t seed;
  std::string intervention;
  double dfn_id_accuracy;
  eval::EvalReport induced;
};

struct RobustnessArm {
  std::uint64_t seed;
  std::string arm;  // baseline | finetuned_dfn | target_appended
  eval::EvalReport report;
};

struct InterpolationRow {
  std::uint64_t seed;
  double alpha;
  eval::EvalReport report;  // the interpolated DFN's own evaluation
};

struct RobustnessResult {
  std::vector<RobustnessArm> arms;
  std::vector<InterpolationRow> interpolation;
};

struct BenchRow {
  std::size_t records;
  unsigned workers;
  double seconds;
  double records_per_second;
};

std::vector<PoisonRow> run_poison_sweep(const ExperimentConfig& cfg, const Logger& log = {});
std::vector<FilterVsDownstreamRow> run_filter_vs_downstream(const ExperimentConfig& cfg, const Logger& log = {});
std::vector<InterventionRow> run_interventions(const ExperimentConfig& cfg, const Logger& log = {});
RobustnessResult run_robustness(const ExperimentConfig& cfg, const Logger& log = {});
std::vector<BenchRow> run_bench_scaling(const ExperimentConfig& cfg, const Logger& log = {});

// Fixed CSV headers.
inline constexpr const char* kPoisonHeader =
    "seed,unfiltered_fraction,dfn_id_accuracy,induced_id_accuracy,average,baseline_id_accuracy";
inline constexpr const char* kFilterVsDownstreamHeader =
    "seed,unfiltered_fraction,train_size,samples_seen,dfn_id_accuracy,induced_id_accuracy,average";
inline constexpr const char* kInterventionHeader =
    "seed,intervention,dfn_id_accuracy,id_accuracy,shift_average,recall_i2t,recall_t2i,average";
inline constexpr const char* kRobustnessHeader = "seed,arm,id_accuracy,shift,shift_accuracy";
inline constexpr const char* kInterpolationHeader = "seed,alpha,id_accuracy,robustness_average,average";
inline constexpr const char* kBenchHeader = "records,workers,seconds,records_per_second";

// Appends rows to `path`, writing `header` first when the file is new.
// An existing file with a different header is an error.
void append_csv(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& rows);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};
// Minimal static line/scatter plot.
void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series, bool lines = true);

// Exclusive ownership of an output directory via a lock file. A stale lock
// from a crashed run must be removed by hand.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

inline constexpr const char* kSnapshotName = "config.snapshot";
inline constexpr const char* kLockName = ".dfn.lock";

// Commands. All write `config.snapshot` into `out`; re-running a command
// with that snapshot reproduces every non-timing output byte for byte.
void cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_train_dfn(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_calibrate(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_filter(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_induce(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_eval(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_poison_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_filter_vs_downstream(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_interventions(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_robustness(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
void cmd_bench_scaling(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});
// generate -> train DFN -> calibrate -> filter -> induce -> evaluate.
void cmd_run_all(const ExperimentConfig& cfg, const std::filesystem::path& out, const Logger& log = {});

// Dispatches on a command name as stored in the snapshot's `experiment` key.
void run_command(const std::string& name, const ExperimentConfig& cfg, const std::filesystem::path& out,
                 const Logger& log = {});

// Loads a CLIP checkpoint (.dfnm) or a binary scorer (.json).
filter::Scorer load_scorer(const std::filesystem::path& path);

}  // namespace dfn::exp
