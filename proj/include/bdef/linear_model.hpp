#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdef/data.hpp"
#include "bdef/experts.hpp"
#include "bdef/parallel.hpp"

namespace bdef {

// Affine scorer over decision indices. Losses see scores clipped to
// [-score_bound, score_bound]; prediction argmaxes the unclipped scores so
// it is invariant to constant shifts.
class LinearScorer {
 public:
  LinearScorer() = default;
  LinearScorer(int n_decisions, int n_features, double score_bound);

  int n_decisions() const { return n_decisions_; }
  int n_features() const { return n_features_; }
  double score_bound() const { return bound_; }

  double& weight(int k, int j) { return w_[static_cast<std::size_t>(k) * n_features_ + j]; }
  double weight(int k, int j) const { return w_[static_cast<std::size_t>(k) * n_features_ + j]; }
  double& bias(int k) { return b_[static_cast<std::size_t>(k)]; }
  double bias(int k) const { return b_[static_cast<std::size_t>(k)]; }

  double raw_score(std::span<const double> x, int k) const;
  double score(std::span<const double> x, int k) const;  // clipped
  int predict(std::span<const double> x) const;          // lowest index wins ties

  // All clipped scores for one input; out.size() == n_decisions.
  void clipped_scores(std::span<const double> x, std::span<double> out) const;

 private:
  int n_decisions_ = 0;
  int n_features_ = 0;
  double bound_ = 1.0;
  std::vector<double> w_;  // row-major n_decisions x n_features
  std::vector<double> b_;
};

struct HypothesisPool {
  std::vector<LinearScorer> scorers;
  int n_decisions = 0;
  int n_features = 0;
  double score_bound = 1.0;

  std::size_t size() const { return scorers.size(); }
};

// Full-batch gradient descent on mean multinomial logistic loss with an
// exact proximal step for the l2 penalty (weights only). Deterministic
// given the seed.
LinearScorer train_multinomial_logistic(std::span<const Example> examples,
                                        std::span<const int> targets, int n_decisions,
                                        double l2, int epochs, double step,
                                        std::uint64_t seed, double score_bound = 1.0);

double multinomial_logistic_objective(const LinearScorer& s, std::span<const Example> examples,
                                      std::span<const int> targets, double l2);

enum class TargetRule { BestExpert, RandomGaussian };

struct PoolOptions {
  int pool_size = 64;
  int subsample_min = 30;
  int subsample_max = 500;
  TargetRule target_rule = TargetRule::BestExpert;
  double l2 = 0.0001220703125;  // 2^-13
  int epochs = 500;
  double step = 0.1;
  double score_bound = 1.0;
  int n_decisions = 0;  // required
  double gaussian_sigma = 1.0;
  ExecMode exec = ExecMode::Serial;
};

// Each member trains on an independent uniform subsample of size
// U{subsample_min..subsample_max} capped at the dataset size. Member seeds
// derive from (seed, member index), so results do not depend on scheduling.
HypothesisPool build_hypothesis_pool(const Dataset& ds, const PoolOptions& opts,
                                     const ExpertPanel* panel, std::uint64_t seed);

void save_pool(const HypothesisPool& pool, const std::string& path);
HypothesisPool load_pool(const std::string& path);

}  // namespace bdef
