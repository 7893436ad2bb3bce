#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bdef/experts.hpp"
#include "bdef/kernels.hpp"
#include "bdef/losses.hpp"
#include "bdef/rng.hpp"

namespace bdef {

// Expert-selection distribution. q_min is taken over the positive entries;
// uniform q minimizes q_bar = 1/q_min + 1.
struct SamplingPolicy {
  std::vector<double> q;

  static SamplingPolicy uniform(int n_arms);
  double q_min() const;
  double q_bar() const { return 1.0 / q_min() + 1.0; }
  void validate() const;
};

enum class ThresholdMode { Azuma, Freedman };

struct ThresholdConfig {
  ThresholdMode mode = ThresholdMode::Azuma;
  double delta = 0.1;
};

// sqrt(q_bar^2 * (8/t) * log(2 t (t+1) |R|^2 / delta)); may exceed 1 early.
double azuma_threshold(std::int64_t t, std::int64_t pool_size, double delta, double q_bar);

// Variance-adaptive alternative; sum_p is the running total of all emitted
// sampling probabilities through round t. Defined for t >= 3.
double freedman_threshold(std::int64_t t, std::int64_t pool_size, double delta, double q_min,
                          int n_experts, double sum_p);

struct VersionSpace {
  std::vector<char> active;
  std::int64_t round = 0;

  static VersionSpace full(std::size_t pool_size);
  int count() const;
};

// Keep members whose error is within delta_t of the active minimum; the
// minimizer always survives. Entries of `errors` for inactive members are
// ignored.
VersionSpace prune_version_space(const VersionSpace& vs, std::span<const double> errors,
                                 double delta_t);

// max - min of the normalized per-expert loss over active members.
double sampling_prob(const VersionSpace& vs, const HypothesisPool& pool, const LossConfig& cfg,
                     std::span<const double> x, int k);

int sample_expert(const SamplingPolicy& policy, Rng& rng);

// One round of recorded engine history, aligned with the stream prefix.
struct RoundRecord {
  int k = 0;
  bool queried = false;
  double q = 0.0;
  double p = 0.0;
  int cost = 0;  // meaningful only when queried
};

// Importance weighted empirical estimate of the expected surrogate.
double iw_estimate(std::span<const Example> stream, std::span<const RoundRecord> rounds,
                   const LinearScorer& r, const LossConfig& cfg);

struct WeightedSample {
  const Example* x = nullptr;
  int k = 0;
  int cost = 0;
  double weight = 0.0;
};

// argmin over the subset (all members when subset is empty) of the stored
// weighted objective; lowest index wins ties.
int weighted_erm(std::span<const WeightedSample> samples, const HypothesisPool& pool,
                 const LossConfig& cfg, std::span<const char> subset = {});

struct RoundLogEntry {
  std::int64_t t = 0;
  std::uint64_t cumulative_queries = 0;
  std::uint64_t available_queries = 0;
  int versionspace_size = 0;
  double delta = 0.0;       // threshold value at this round
  double p_selected = 0.0;
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::int64_t arm0_count = 0;                // single-stage engine only
  std::vector<std::uint64_t> expert_queries;  // single-stage engine only
};

struct EngineConfig {
  SamplingPolicy policy;  // empty q -> uniform over the engine's arms
  ThresholdConfig threshold;
  std::int64_t horizon = 1000;
  std::uint64_t seed = 1;
  std::int64_t log_every = 0;  // 0 -> max(1, horizon/200)
  bool erm_over_full_pool = false;
  bool record_history = false;
  bool evaluate_accuracy = true;
  ExecMode exec = ExecMode::Serial;
};

struct TwoStageResult {
  int selected = 0;
  std::vector<RoundLogEntry> log;
  std::uint64_t total_queries = 0;
  VersionSpace version_space;
  std::vector<double> member_errors;  // final E_T per member (stale once pruned)
  std::vector<RoundRecord> history;   // populated when record_history
};

// Algorithm: per round, prune the version space against the previous-round
// threshold, set per-expert query probabilities from the active loss spread,
// sample one expert, gate the single cost query by a Bernoulli draw, and
// refit the weighted ERM.
TwoStageResult run_budgeted_two_stage(const Dataset& stream, const Dataset& test,
                                      const HypothesisPool& pool, ExpertPanel& panel,
                                      const EngineConfig& cfg);

// Full-information baseline: queries every expert cost each round and
// minimizes the unweighted empirical surrogate over the whole pool.
TwoStageResult run_baseline_two_stage(const Dataset& stream, const Dataset& test,
                                      const HypothesisPool& pool, ExpertPanel& panel,
                                      const EngineConfig& cfg);

}  // namespace bdef
