#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bdef/single_stage.hpp"
#include "bdef/two_stage.hpp"

namespace bdef {

enum class TheoryQuantity { SlopeAsymmetry, RhoDistance, DisagreementCoefficient };

struct TheoryEstimate {
  TheoryQuantity quantity = TheoryQuantity::SlopeAsymmetry;
  double value = 0.0;
  std::int64_t sample_size = 0;
  std::int64_t infinite_count = 0;       // slope-asymmetry tuples with a vanishing denominator
  std::vector<double> epsilon_grid;
};

// Worst sampled ratio of the full loss-difference sum to the sum over the
// instance's zero-cost experts. Identical scorers contribute 1 (0/0
// convention); zero denominators with a positive numerator are counted in
// infinite_count and excluded from the max.
TheoryEstimate estimate_slope_asymmetry(const HypothesisPool& pool, const Dataset& examples,
                                        const ExpertPanel& panel, std::int64_t pair_budget,
                                        std::uint64_t seed);

// Empirical mean over examples of sum_k |loss_a - loss_b| at every expert
// component; the max over binary cost vectors is attained at all-zero costs.
double rho_distance(const LinearScorer& a, const LinearScorer& b, const Dataset& examples,
                    const LossConfig& cfg);

// Brute-force disagreement coefficient over the finite pool: the largest
// over the grid of (1/eps) * mean_x sup over the rho-ball of the per-expert
// loss gap to the reference member.
TheoryEstimate estimate_disagreement_coefficient(const HypothesisPool& pool, int r_star,
                                                 const Dataset& examples,
                                                 std::span<const double> epsilon_grid,
                                                 const LossConfig& cfg);

// Exact expectation of iw_estimate under the algorithm's sampling
// randomness, by enumerating every (k_t, Q_t) outcome sequence with its
// probability. Instances must stay within the enumeration cap (1e5 leaves).
// Returns one value per pool member.
std::vector<double> exhaustive_iw_expectation(std::span<const Example> stream,
                                              std::span<const CostVector> costs,
                                              const HypothesisPool& pool, const LossConfig& cfg,
                                              const SamplingPolicy& policy,
                                              const std::vector<std::vector<double>>& p);

// Single-stage variant; policy has n_experts + 1 arms, arm 0 always stores.
std::vector<double> exhaustive_iw_expectation_single(std::span<const Example> stream,
                                                     std::span<const CostVector> costs,
                                                     const HypothesisPool& pool,
                                                     const LossConfig& cfg, int n_classes,
                                                     const SamplingPolicy& policy,
                                                     const std::vector<std::vector<double>>& p);

}  // namespace bdef
