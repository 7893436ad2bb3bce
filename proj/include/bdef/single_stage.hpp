#pragma once

#include "bdef/two_stage.hpp"

namespace bdef {

// Single-stage variants: the scorer covers n_classes direct predictions plus
// n_experts deferral decisions, and arm 0 of the sampling policy means
// "predict directly" (always stored, never charged against the budget).

// max - min over active members of the loss at deferral decision
// n_classes + k.
double sampling_prob_single(const VersionSpace& vs, const HypothesisPool& pool,
                            const LossConfig& cfg, std::span<const double> x, int k,
                            int n_classes);

struct SingleRoundRecord {
  int arm = 0;           // 0 = direct prediction, otherwise expert arm - 1
  bool queried = false;  // always false for arm 0
  double q = 0.0;
  double p = 0.0;  // unused for arm 0
  int cost = 0;
};

double iw_estimate_single(std::span<const Example> stream,
                          std::span<const SingleRoundRecord> rounds, const LinearScorer& h,
                          const LossConfig& cfg, int n_classes);

struct SingleStageSample {
  const Example* x = nullptr;
  int y = 0;
  int arm = 0;  // 0 = direct prediction
  int cost = 0;
  double weight = 0.0;
};

int weighted_erm_single(std::span<const SingleStageSample> samples, const HypothesisPool& pool,
                        const LossConfig& cfg, int n_classes, std::span<const char> subset = {});

struct SingleStageResult {
  int selected = 0;
  std::vector<RoundLogEntry> log;
  std::uint64_t total_queries = 0;
  std::int64_t arm0_count = 0;
  std::vector<std::uint64_t> expert_queries;
  VersionSpace version_space;
  std::vector<double> member_errors;
  std::vector<SingleRoundRecord> history;
};

// Per round: prune, draw an arm from the (n_experts + 1)-way policy; arm 0
// stores a direct-prediction sample with weight 1/q0 and skips the query
// block entirely; any other arm gates one cost query by Bernoulli(p).
SingleStageResult run_budgeted_single_stage(const Dataset& stream, const Dataset& test,
                                            const HypothesisPool& pool, ExpertPanel& panel,
                                            const EngineConfig& cfg);

}  // namespace bdef
