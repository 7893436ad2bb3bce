#include "bdef/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bdef/rng.hpp"

namespace bdef {

TheoryEstimate estimate_slope_asymmetry(const HypothesisPool& pool, const Dataset& examples,
                                        const ExpertPanel& panel, std::int64_t pair_budget,
                                        std::uint64_t seed) {
  if (pool.size() == 0 || examples.examples.empty())
    throw std::invalid_argument("slope asymmetry needs a nonempty pool and example set");
  const LossConfig cfg = LossConfig::two_stage(panel.n_experts(), pool.score_bound);

  Rng rng(seed);
  TheoryEstimate est;
  est.quantity = TheoryQuantity::SlopeAsymmetry;
  est.sample_size = pair_budget;
  double worst = 1.0;

  std::vector<double> diff(static_cast<std::size_t>(panel.n_experts()));
  for (std::int64_t it = 0; it < pair_budget; ++it) {
    const std::size_t a = rng.uniform_int(pool.size());
    const std::size_t b = rng.uniform_int(pool.size());
    const Example& ex = examples.examples[rng.uniform_int(examples.size())];

    double numerator = 0.0;
    for (int k = 0; k < panel.n_experts(); ++k) {
      diff[static_cast<std::size_t>(k)] = std::abs(comp_sum_loss(cfg, pool.scorers[a], ex.features, k) -
                                                   comp_sum_loss(cfg, pool.scorers[b], ex.features, k));
      numerator += diff[static_cast<std::size_t>(k)];
    }

    const CostVector costs = panel.cost_vector_unbudgeted(ex);
    double denominator = 0.0;
    for (int k = 0; k < panel.n_experts(); ++k)
      if (costs[static_cast<std::size_t>(k)] == 0) denominator += diff[static_cast<std::size_t>(k)];

    if (denominator == 0.0) {
      if (numerator == 0.0) continue;  // identical scorers: ratio 1 by convention
      ++est.infinite_count;
      continue;
    }
    worst = std::max(worst, numerator / denominator);
  }
  est.value = worst;
  return est;
}

double rho_distance(const LinearScorer& a, const LinearScorer& b, const Dataset& examples,
                    const LossConfig& cfg) {
  if (examples.examples.empty()) throw std::invalid_argument("rho distance needs examples");
  double acc = 0.0;
  for (const Example& ex : examples.examples) {
    for (int k = 0; k < cfg.n_experts; ++k)
      acc += std::abs(comp_sum_loss(cfg, a, ex.features, k) - comp_sum_loss(cfg, b, ex.features, k));
  }
  return acc / static_cast<double>(examples.size());
}

TheoryEstimate estimate_disagreement_coefficient(const HypothesisPool& pool, int r_star,
                                                 const Dataset& examples,
                                                 std::span<const double> epsilon_grid,
                                                 const LossConfig& cfg) {
  if (epsilon_grid.empty()) throw std::invalid_argument("empty epsilon grid");
  if (r_star < 0 || static_cast<std::size_t>(r_star) >= pool.size())
    throw std::out_of_range("reference member out of range");

  const LinearScorer& ref = pool.scorers[static_cast<std::size_t>(r_star)];
  std::vector<double> rho(pool.size(), 0.0);
  for (std::size_t i = 0; i < pool.size(); ++i)
    rho[i] = rho_distance(pool.scorers[i], ref, examples, cfg);

  TheoryEstimate est;
  est.quantity = TheoryQuantity::DisagreementCoefficient;
  est.sample_size = static_cast<std::int64_t>(examples.size());
  est.epsilon_grid.assign(epsilon_grid.begin(), epsilon_grid.end());

  double theta = 0.0;
  for (double eps : epsilon_grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon grid entries must be positive");
    double mean_sup = 0.0;
    for (const Example& ex : examples.examples) {
      double sup = 0.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (rho[i] > eps) continue;
        for (int k = 0; k < cfg.n_experts; ++k)
          sup = std::max(sup, std::abs(comp_sum_loss(cfg, pool.scorers[i], ex.features, k) -
                                       comp_sum_loss(cfg, ref, ex.features, k)));
      }
      mean_sup += sup;
    }
    mean_sup /= static_cast<double>(examples.size());
    theta = std::max(theta, mean_sup / eps);
  }
  est.value = theta;
  return est;
}

namespace {

constexpr std::int64_t kEnumerationCap = 100000;

}  // namespace

std::vector<double> exhaustive_iw_expectation(std::span<const Example> stream,
                                              std::span<const CostVector> costs,
                                              const HypothesisPool& pool, const LossConfig& cfg,
                                              const SamplingPolicy& policy,
                                              const std::vector<std::vector<double>>& p) {
  const std::size_t rounds = stream.size();
  if (costs.size() != rounds || p.size() != rounds)
    throw std::invalid_argument("stream, costs and p must align");
  const int n_e = static_cast<int>(policy.q.size());

  double leaves = 1.0;
  for (std::size_t t = 0; t < rounds; ++t) leaves *= 2.0 * n_e;
  if (leaves > static_cast<double>(kEnumerationCap))
    throw std::invalid_argument("instance too large for exhaustive enumeration");

  std::vector<double> acc(pool.size(), 0.0);
  std::vector<RoundRecord> records(rounds);

  auto recurse = [&](auto&& self, std::size_t t, double prob) -> void {
    if (prob == 0.0) return;
    if (t == rounds) {
      for (std::size_t i = 0; i < pool.size(); ++i)
        acc[i] += prob * iw_estimate(stream, records, pool.scorers[i], cfg);
      return;
    }
    for (int k = 0; k < n_e; ++k) {
      const double qk = policy.q[static_cast<std::size_t>(k)];
      const double pk = p[t][static_cast<std::size_t>(k)];
      records[t] = {k, false, qk, pk, 0};
      self(self, t + 1, prob * qk * (1.0 - pk));
      records[t] = {k, true, qk, pk, costs[t][static_cast<std::size_t>(k)]};
      self(self, t + 1, prob * qk * pk);
    }
  };
  recurse(recurse, 0, 1.0);
  return acc;
}

std::vector<double> exhaustive_iw_expectation_single(std::span<const Example> stream,
                                                     std::span<const CostVector> costs,
                                                     const HypothesisPool& pool,
                                                     const LossConfig& cfg, int n_classes,
                                                     const SamplingPolicy& policy,
                                                     const std::vector<std::vector<double>>& p) {
  const std::size_t rounds = stream.size();
  if (costs.size() != rounds || p.size() != rounds)
    throw std::invalid_argument("stream, costs and p must align");
  const int n_e = static_cast<int>(policy.q.size()) - 1;

  double leaves = 1.0;
  for (std::size_t t = 0; t < rounds; ++t) leaves *= 1.0 + 2.0 * n_e;
  if (leaves > static_cast<double>(kEnumerationCap))
    throw std::invalid_argument("instance too large for exhaustive enumeration");

  std::vector<double> acc(pool.size(), 0.0);
  std::vector<SingleRoundRecord> records(rounds);

  auto recurse = [&](auto&& self, std::size_t t, double prob) -> void {
    if (prob == 0.0) return;
    if (t == rounds) {
      for (std::size_t i = 0; i < pool.size(); ++i)
        acc[i] += prob * iw_estimate_single(stream, records, pool.scorers[i], cfg, n_classes);
      return;
    }
    records[t] = {0, false, policy.q[0], 0.0, 0};
    self(self, t + 1, prob * policy.q[0]);
    for (int k = 0; k < n_e; ++k) {
      const double qk = policy.q[static_cast<std::size_t>(k + 1)];
      const double pk = p[t][static_cast<std::size_t>(k)];
      records[t] = {k + 1, false, qk, pk, 0};
      self(self, t + 1, prob * qk * (1.0 - pk));
      records[t] = {k + 1, true, qk, pk, costs[t][static_cast<std::size_t>(k)]};
      self(self, t + 1, prob * qk * pk);
    }
  };
  recurse(recurse, 0, 1.0);
  return acc;
}

}  // namespace bdef
