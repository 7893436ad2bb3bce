#include <doctest.h>

#include <cmath>

#include "bdef/diagnostics.hpp"
#include "bdef/harness.hpp"

using namespace bdef;

namespace {

HypothesisPool random_pool(int members, int decisions, int features, std::uint64_t seed,
                           double sigma = 1.0) {
  HypothesisPool pool;
  pool.n_decisions = decisions;
  pool.n_features = features;
  pool.score_bound = 1.0;
  Rng rng(seed);
  for (int i = 0; i < members; ++i) {
    LinearScorer s(decisions, features, 1.0);
    for (int k = 0; k < decisions; ++k) {
      s.bias(k) = sigma * rng.gaussian();
      for (int j = 0; j < features; ++j) s.weight(k, j) = sigma * rng.gaussian();
    }
    pool.scorers.push_back(std::move(s));
  }
  return pool;
}

Dataset small_examples(int n, int features, int classes, std::uint64_t seed) {
  Dataset ds;
  ds.n_classes = classes;
  ds.n_features = features;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    Example ex;
    ex.label = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(classes)));
    for (int j = 0; j < features; ++j) ex.features.push_back(rng.gaussian());
    ex.uid = static_cast<std::uint64_t>(i);
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

// Closed form of the expected two-stage surrogate for fixed costs.
double expected_two_stage(const LinearScorer& r, const LossConfig& cfg,
                          std::span<const Example> stream, std::span<const CostVector> costs) {
  double acc = 0.0;
  for (std::size_t t = 0; t < stream.size(); ++t)
    acc += two_stage_surrogate(cfg, r, stream[t].features, costs[t]);
  return acc / static_cast<double>(stream.size());
}

double expected_single_stage(const LinearScorer& h, const LossConfig& cfg,
                             std::span<const Example> stream, std::span<const CostVector> costs) {
  double acc = 0.0;
  for (std::size_t t = 0; t < stream.size(); ++t)
    acc += single_stage_surrogate(cfg, h, stream[t].features, stream[t].label, costs[t]);
  return acc / static_cast<double>(stream.size());
}

}  // namespace

TEST_CASE("slope asymmetry is 1 for identical scorers and at least 1 in general") {
  const HypothesisPool single = random_pool(1, 3, 2, 5);
  HypothesisPool twins;
  twins.n_decisions = 3;
  twins.n_features = 2;
  twins.scorers = {single.scorers[0], single.scorers[0]};

  const Dataset ds = small_examples(50, 2, 3, 7);
  ExpertPanel panel(3, 9);
  const TheoryEstimate identical = estimate_slope_asymmetry(twins, ds, panel, 500, 1);
  CHECK(identical.value == 1.0);
  CHECK(identical.infinite_count == 0);

  const HypothesisPool pool = random_pool(6, 3, 2, 11);
  const TheoryEstimate est = estimate_slope_asymmetry(pool, ds, panel, 2000, 2);
  CHECK(est.value >= 1.0);
  CHECK(est.sample_size == 2000);
}

TEST_CASE("slope asymmetry estimates are deterministic given the seed") {
  const Dataset ds = small_examples(200, 2, 3, 13);
  ExpertPanel panel(3, 15);
  const HypothesisPool pool = random_pool(8, 3, 2, 17, 2.0);
  const TheoryEstimate a = estimate_slope_asymmetry(pool, ds, panel, 5000, 3);
  const TheoryEstimate b = estimate_slope_asymmetry(pool, ds, panel, 5000, 3);
  CHECK(a.value == b.value);
  CHECK(a.infinite_count == b.infinite_count);
  CHECK(a.value >= 1.0);
}

TEST_CASE("rho is a pseudometric on sampled pools") {
  const HypothesisPool pool = random_pool(6, 3, 2, 19);
  const Dataset ds = small_examples(60, 2, 3, 21);
  const LossConfig cfg = LossConfig::two_stage(3, 1.0);

  CHECK(rho_distance(pool.scorers[0], pool.scorers[0], ds, cfg) == 0.0);

  Rng rng(23);
  for (int it = 0; it < 30; ++it) {
    const std::size_t a = rng.uniform_int(pool.size());
    const std::size_t b = rng.uniform_int(pool.size());
    const std::size_t c = rng.uniform_int(pool.size());
    const double ab = rho_distance(pool.scorers[a], pool.scorers[b], ds, cfg);
    const double ba = rho_distance(pool.scorers[b], pool.scorers[a], ds, cfg);
    const double ac = rho_distance(pool.scorers[a], pool.scorers[c], ds, cfg);
    const double cb = rho_distance(pool.scorers[c], pool.scorers[b], ds, cfg);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab <= ac + cb + 1e-12);
  }
}

TEST_CASE("disagreement coefficient is zero for a singleton pool") {
  const HypothesisPool pool = random_pool(1, 3, 2, 25);
  const Dataset ds = small_examples(40, 2, 3, 27);
  const LossConfig cfg = LossConfig::two_stage(3, 1.0);
  const std::vector<double> grid = {0.1, 0.5, 1.0};
  CHECK(estimate_disagreement_coefficient(pool, 0, ds, grid, cfg).value == 0.0);
}

TEST_CASE("disagreement coefficient saturates beyond the pool diameter") {
  const HypothesisPool pool = random_pool(4, 3, 2, 29);
  const Dataset ds = small_examples(60, 2, 3, 31);
  const LossConfig cfg = LossConfig::two_stage(3, 1.0);

  double diameter = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i)
    diameter = std::max(diameter, rho_distance(pool.scorers[i], pool.scorers[0], ds, cfg));

  const std::vector<double> grid = {0.05, 0.1, 0.5, diameter + 1.0};
  const std::vector<double> extended = {0.05, 0.1, 0.5, diameter + 1.0, diameter + 5.0,
                                        diameter + 50.0};
  const double theta = estimate_disagreement_coefficient(pool, 0, ds, grid, cfg).value;
  const double theta_ext = estimate_disagreement_coefficient(pool, 0, ds, extended, cfg).value;
  CHECK(theta == doctest::Approx(theta_ext).epsilon(1e-12));
  CHECK(theta > 0.0);

  CHECK_THROWS(estimate_disagreement_coefficient(pool, 0, ds, {}, cfg));
  CHECK_THROWS(estimate_disagreement_coefficient(pool, 9, ds, grid, cfg));
}

TEST_CASE("exhaustive oracle equals the closed-form surrogate") {
  Rng rng(33);
  const LossConfig cfg = LossConfig::two_stage(2, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int rounds = 1 + static_cast<int>(rng.uniform_int(3));
    const HypothesisPool pool = random_pool(2 + static_cast<int>(rng.uniform_int(2)), 2, 2, 100 + rep);
    Dataset ds = small_examples(rounds, 2, 2, 200 + rep);

    std::vector<CostVector> costs;
    std::vector<std::vector<double>> p;
    for (int t = 0; t < rounds; ++t) {
      costs.push_back(CostVector{{static_cast<std::uint8_t>(rng.uniform_int(2)),
                                  static_cast<std::uint8_t>(rng.uniform_int(2))}});
      p.push_back({0.25 + 0.75 * rng.uniform(), 0.25 + 0.75 * rng.uniform()});
    }
    const SamplingPolicy policy = SamplingPolicy::uniform(2);
    const std::vector<double> oracle =
        exhaustive_iw_expectation(ds.examples, costs, pool, cfg, policy, p);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double closed = expected_two_stage(pool.scorers[i], cfg, ds.examples, costs);
      CHECK(std::abs(oracle[i] - closed) < 1e-12);
    }
  }
}

TEST_CASE("degenerate policy with p=1 makes the estimator deterministic") {
  const LossConfig cfg = LossConfig::two_stage(2, 1.0);
  const HypothesisPool pool = random_pool(2, 2, 2, 35);
  Dataset ds = small_examples(2, 2, 2, 37);
  const std::vector<CostVector> costs = {CostVector{{0, 1}}, CostVector{{0, 0}}};
  const std::vector<std::vector<double>> p = {{1.0, 1.0}, {1.0, 1.0}};

  SamplingPolicy degenerate;
  degenerate.q = {1.0, 0.0};
  const std::vector<double> oracle =
      exhaustive_iw_expectation(ds.examples, costs, pool, cfg, degenerate, p);

  // Single possible outcome: expert 0 queried in both rounds.
  std::vector<RoundRecord> rounds = {{0, true, 1.0, 1.0, costs[0][0]},
                                     {0, true, 1.0, 1.0, costs[1][0]}};
  for (std::size_t i = 0; i < pool.size(); ++i)
    CHECK(oracle[i] ==
          doctest::Approx(iw_estimate(ds.examples, rounds, pool.scorers[i], cfg)).epsilon(1e-14));
}

TEST_CASE("single-stage oracle equals the closed form") {
  Rng rng(39);
  const LossConfig cfg = LossConfig::single_stage(2, 2, 1.0);
  for (int rep = 0; rep < 8; ++rep) {
    const int rounds = 1 + static_cast<int>(rng.uniform_int(2));
    const HypothesisPool pool = random_pool(2, 4, 2, 300 + rep);
    Dataset ds = small_examples(rounds, 2, 2, 400 + rep);

    std::vector<CostVector> costs;
    std::vector<std::vector<double>> p;
    for (int t = 0; t < rounds; ++t) {
      costs.push_back(CostVector{{static_cast<std::uint8_t>(rng.uniform_int(2)),
                                  static_cast<std::uint8_t>(rng.uniform_int(2))}});
      p.push_back({0.25 + 0.75 * rng.uniform(), 0.25 + 0.75 * rng.uniform()});
    }
    const SamplingPolicy policy = SamplingPolicy::uniform(3);
    const std::vector<double> oracle =
        exhaustive_iw_expectation_single(ds.examples, costs, pool, cfg, 2, policy, p);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double closed = expected_single_stage(pool.scorers[i], cfg, ds.examples, costs);
      CHECK(std::abs(oracle[i] - closed) < 1e-12);
    }
  }
}

TEST_CASE("oracle rejects instances beyond the enumeration cap") {
  const LossConfig cfg = LossConfig::two_stage(3, 1.0);
  const HypothesisPool pool = random_pool(2, 3, 2, 41);
  Dataset ds = small_examples(12, 2, 3, 43);  // (2*3)^12 outcomes
  std::vector<CostVector> costs(12, CostVector{{0, 0, 0}});
  std::vector<std::vector<double>> p(12, {0.5, 0.5, 0.5});
  CHECK_THROWS(
      exhaustive_iw_expectation(ds.examples, costs, pool, cfg, SamplingPolicy::uniform(3), p));
}
