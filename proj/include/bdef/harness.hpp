#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdef/single_stage.hpp"
#include "bdef/two_stage.hpp"

namespace bdef {

// Gaussian class clusters separated by `margin`; labels are assigned to the
// nearest center, so small margins give an agnostic task.
struct SynthSpec {
  int n_classes = 3;
  int n_features = 8;
  std::int64_t n_examples = 4000;
  double margin = 10.0;
  std::uint64_t seed = 1;
};

Dataset make_synthetic(const SynthSpec& spec);

enum class Algorithm { TwoStageBudgeted, TwoStageBaseline, SingleStageBudgeted };

Algorithm algorithm_from_string(std::string_view name);
std::string_view algorithm_to_string(Algorithm algo);

struct RunConfig {
  std::string dataset_path;  // empty -> synthetic
  SynthSpec synth;
  Algorithm algorithm = Algorithm::TwoStageBudgeted;
  std::int64_t horizon = 2000;
  double delta = 0.1;
  ThresholdMode threshold = ThresholdMode::Azuma;
  std::string q_policy = "uniform";
  int pool_size = 64;
  TargetRule target_rule = TargetRule::BestExpert;  // single-stage pools ignore this and use random_gaussian
  bool target_rule_given = false;
  double l2 = 0.0001220703125;  // 2^-13
  double score_bound = 1.0;
  int pool_epochs = 500;
  double pool_step = 0.1;
  int trials = 5;
  std::uint64_t master_seed = 1;
  std::int64_t log_every = 0;
  double test_fraction = 0.3;
  std::int64_t max_rows = 0;
  bool erm_over_full_pool = false;
  bool parallel = false;  // OpenMP kernels and concurrent trials
  std::string output_path;
};

// Trial-aggregated point of the query/accuracy curves.
struct CurvePoint {
  std::int64_t t = 0;
  double available = 0.0;
  double queried = 0.0;  // mean cumulative queries across trials
  double acc_mean = 0.0;
  double acc_stderr = 0.0;
  double vs_size = 0.0;
  double delta = 0.0;
};

struct ExperimentResult {
  std::vector<CurvePoint> points;
  std::vector<std::vector<RoundLogEntry>> trial_logs;
};

// Runs `trials` independent seeded trials (fresh split, pool, experts and
// engine per trial) and aggregates the logs per round. Writes the CSV when
// the config names an output path.
ExperimentResult run_experiment(const RunConfig& cfg);

// Header: t,available,queried,acc_mean,acc_stderr,vs_size,delta.
// Deterministic byte output for identical points.
void emit_csv(std::span<const CurvePoint> points, const std::string& path);

std::string format_csv(std::span<const CurvePoint> points);

// Plain key=value configuration file; '#' starts a comment.
RunConfig load_config_file(const std::string& path);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace bdef
