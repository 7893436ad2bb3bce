#include "bdef/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdef {

SamplingPolicy SamplingPolicy::uniform(int n_arms) {
  if (n_arms < 1) throw std::invalid_argument("need at least one arm");
  SamplingPolicy p;
  p.q.assign(static_cast<std::size_t>(n_arms), 1.0 / static_cast<double>(n_arms));
  return p;
}

double SamplingPolicy::q_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : q)
    if (v > 0.0) m = std::min(m, v);
  return m;
}

void SamplingPolicy::validate() const {
  if (q.empty()) throw std::invalid_argument("empty sampling policy");
  double sum = 0.0;
  bool positive = false;
  for (double v : q) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("sampling probabilities must be nonnegative");
    positive = positive || v > 0.0;
    sum += v;
  }
  if (!positive) throw std::invalid_argument("sampling policy has no positive entry");
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("sampling probabilities must sum to 1");
}

double azuma_threshold(std::int64_t t, std::int64_t pool_size, double delta, double q_bar) {
  if (t < 1) throw std::invalid_argument("azuma threshold needs t >= 1");
  const double td = static_cast<double>(t);
  const double r = static_cast<double>(pool_size);
  return std::sqrt(q_bar * q_bar * (8.0 / td) * std::log(2.0 * td * (td + 1.0) * r * r / delta));
}

double freedman_threshold(std::int64_t t, std::int64_t pool_size, double delta, double q_min,
                          int n_experts, double sum_p) {
  if (t < 3) throw std::domain_error("freedman threshold needs t >= 3");
  if (sum_p < 0.0) throw std::invalid_argument("sum_p must be nonnegative");
  const double td = static_cast<double>(t);
  const double r = static_cast<double>(pool_size);
  const double extra = 6.0 * std::sqrt(std::log((3.0 + n_experts * td) * td * td / delta));
  const double tail = std::sqrt(std::log(8.0 * td * td * r * r * std::log(td) / delta));
  return 2.0 / (td * q_min) * (std::sqrt(sum_p) + extra) * tail;
}

VersionSpace VersionSpace::full(std::size_t pool_size) {
  VersionSpace vs;
  vs.active.assign(pool_size, 1);
  return vs;
}

int VersionSpace::count() const {
  int n = 0;
  for (char a : active) n += a ? 1 : 0;
  return n;
}

VersionSpace prune_version_space(const VersionSpace& vs, std::span<const double> errors,
                                 double delta_t) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vs.active.size(); ++i)
    if (vs.active[i]) best = std::min(best, errors[i]);

  VersionSpace out = vs;
  out.round = vs.round + 1;
  const double cutoff = best + delta_t;
  for (std::size_t i = 0; i < vs.active.size(); ++i)
    if (vs.active[i] && errors[i] > cutoff) out.active[i] = 0;
  return out;
}

double sampling_prob(const VersionSpace& vs, const HypothesisPool& pool, const LossConfig& cfg,
                     std::span<const double> x, int k) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!vs.active[i]) continue;
    const double v = comp_sum_loss(cfg, pool.scorers[i], x, k);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) throw std::invalid_argument("empty version space");
  return hi - lo;
}

int sample_expert(const SamplingPolicy& policy, Rng& rng) { return rng.categorical(policy.q); }

double iw_estimate(std::span<const Example> stream, std::span<const RoundRecord> rounds,
                   const LinearScorer& r, const LossConfig& cfg) {
  if (rounds.size() > stream.size()) throw std::invalid_argument("more rounds than stream examples");
  double acc = 0.0;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    const RoundRecord& rec = rounds[t];
    if (!rec.queried) continue;
    const double w = 1.0 / (rec.q * rec.p);
    acc += w * (1.0 - rec.cost) * comp_sum_loss(cfg, r, stream[t].features, rec.k);
  }
  return acc / static_cast<double>(rounds.size());
}

int weighted_erm(std::span<const WeightedSample> samples, const HypothesisPool& pool,
                 const LossConfig& cfg, std::span<const char> subset) {
  int best = -1;
  double best_value = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!subset.empty() && !subset[i]) continue;
    double value = 0.0;
    for (const WeightedSample& s : samples)
      value += s.weight * (1.0 - s.cost) * comp_sum_loss(cfg, pool.scorers[i], s.x->features, s.k);
    if (best < 0 || value < best_value) {
      best = static_cast<int>(i);
      best_value = value;
    }
  }
  if (best < 0) throw std::invalid_argument("erm over an empty member set");
  return best;
}

namespace {

std::int64_t log_cadence(const EngineConfig& cfg) {
  if (cfg.log_every > 0) return cfg.log_every;
  return std::max<std::int64_t>(1, cfg.horizon / 200);
}

void check_stream(const Dataset& stream, const EngineConfig& cfg) {
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (static_cast<std::int64_t>(stream.size()) < cfg.horizon)
    throw std::invalid_argument("stream exhausted: need " + std::to_string(cfg.horizon) +
                                " examples, have " + std::to_string(stream.size()));
}

}  // namespace

TwoStageResult run_budgeted_two_stage(const Dataset& stream, const Dataset& test,
                                      const HypothesisPool& pool, ExpertPanel& panel,
                                      const EngineConfig& cfg) {
  check_stream(stream, cfg);
  if (pool.size() == 0) throw std::invalid_argument("empty hypothesis pool");
  const int n_e = pool.n_decisions;
  if (panel.n_experts() != n_e)
    throw std::invalid_argument("pool decisions must match the number of experts");

  SamplingPolicy policy = cfg.policy.q.empty() ? SamplingPolicy::uniform(n_e) : cfg.policy;
  policy.validate();
  if (static_cast<int>(policy.q.size()) != n_e)
    throw std::invalid_argument("policy arity must equal the number of experts");

  const LossConfig loss = LossConfig::two_stage(n_e, pool.score_bound);
  const std::size_t members = pool.size();
  const double q_bar = policy.q_bar();
  const double q_min = policy.q_min();

  auto threshold_at = [&](std::int64_t t, double sum_p) {
    if (cfg.threshold.mode == ThresholdMode::Freedman && t >= 3)
      return freedman_threshold(t, static_cast<std::int64_t>(members), cfg.threshold.delta, q_min,
                                n_e, sum_p);
    return azuma_threshold(t, static_cast<std::int64_t>(members), cfg.threshold.delta, q_bar);
  };

  Rng rng(cfg.seed);
  TwoStageResult res;
  res.version_space = VersionSpace::full(members);
  res.member_errors.assign(members, 0.0);
  std::vector<double> sums(members, 0.0);     // sum over stored samples of w (1-c) loss
  std::vector<double> errors(members, 0.0);   // sums / (t-1), for pruning
  std::vector<double> rows(members * static_cast<std::size_t>(n_e), 0.0);
  std::vector<double> p(static_cast<std::size_t>(n_e), 0.0);
  std::vector<char> all_mask(members, 1);
  double sum_p_cum = 0.0;
  std::uint64_t queries = 0;
  int erm_index = 0;
  const std::int64_t cadence = log_cadence(cfg);
  if (cfg.record_history) res.history.reserve(static_cast<std::size_t>(cfg.horizon));

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const Example& ex = stream.examples[static_cast<std::size_t>(t - 1)];

    if (t >= 2) {
      const double delta_prev = threshold_at(t - 1, sum_p_cum);
      const double scale = 1.0 / static_cast<double>(t - 1);
      for (std::size_t i = 0; i < members; ++i)
        if (res.version_space.active[i]) errors[i] = sums[i] * scale;
      res.version_space = prune_version_space(res.version_space, errors, delta_prev);
    } else {
      res.version_space.round = 1;
    }

    const std::span<const char> rows_mask =
        cfg.erm_over_full_pool ? std::span<const char>(all_mask) : std::span<const char>(res.version_space.active);
    kernels::member_loss_rows(pool, loss, ex.features, rows_mask, cfg.exec, rows);
    for (int k = 0; k < n_e; ++k) {
      const kernels::MinMax mm = kernels::column_min_max(rows, n_e, k, res.version_space.active);
      p[static_cast<std::size_t>(k)] = mm.max - mm.min;
      sum_p_cum += p[static_cast<std::size_t>(k)];
    }

    const int k_t = sample_expert(policy, rng);
    const double p_sel = p[static_cast<std::size_t>(k_t)];
    const bool queried = rng.uniform() < p_sel;

    int cost = 0;
    if (queried) {
      cost = panel.query_cost(k_t, ex);
      ++queries;
      const double w = 1.0 / (policy.q[static_cast<std::size_t>(k_t)] * p_sel);
      kernels::accumulate_column(rows, n_e, k_t, w * (1.0 - cost), rows_mask, cfg.exec, sums);
    }

    erm_index = kernels::masked_argmin(sums, rows_mask);
    if (cfg.record_history)
      res.history.push_back({k_t, queried, policy.q[static_cast<std::size_t>(k_t)], p_sel, cost});

    if (t % cadence == 0 || t == cfg.horizon) {
      RoundLogEntry entry;
      entry.t = t;
      entry.cumulative_queries = queries;
      entry.available_queries = static_cast<std::uint64_t>(n_e) * static_cast<std::uint64_t>(t);
      entry.versionspace_size = res.version_space.count();
      entry.delta = threshold_at(t, sum_p_cum);
      entry.p_selected = p_sel;
      if (cfg.evaluate_accuracy)
        entry.test_accuracy =
            system_accuracy_two_stage(pool.scorers[static_cast<std::size_t>(erm_index)], test, panel);
      res.log.push_back(std::move(entry));
    }
  }

  res.selected = erm_index;
  res.total_queries = queries;
  for (std::size_t i = 0; i < members; ++i)
    res.member_errors[i] = sums[i] / static_cast<double>(cfg.horizon);
  return res;
}

TwoStageResult run_baseline_two_stage(const Dataset& stream, const Dataset& test,
                                      const HypothesisPool& pool, ExpertPanel& panel,
                                      const EngineConfig& cfg) {
  check_stream(stream, cfg);
  if (pool.size() == 0) throw std::invalid_argument("empty hypothesis pool");
  const int n_e = pool.n_decisions;
  if (panel.n_experts() != n_e)
    throw std::invalid_argument("pool decisions must match the number of experts");

  const LossConfig loss = LossConfig::two_stage(n_e, pool.score_bound);
  const std::size_t members = pool.size();
  std::vector<double> sums(members, 0.0);
  std::vector<char> all_mask(members, 1);
  std::uint64_t queries = 0;
  int erm_index = 0;
  const std::int64_t cadence = log_cadence(cfg);

  TwoStageResult res;
  res.version_space = VersionSpace::full(members);
  res.member_errors.assign(members, 0.0);

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const Example& ex = stream.examples[static_cast<std::size_t>(t - 1)];
    const CostVector costs = panel.query_cost_vector(ex);
    queries += static_cast<std::uint64_t>(n_e);
    kernels::accumulate_two_stage_surrogate(pool, loss, ex.features, costs, cfg.exec, sums);
    erm_index = kernels::masked_argmin(sums, all_mask);

    if (t % cadence == 0 || t == cfg.horizon) {
      RoundLogEntry entry;
      entry.t = t;
      entry.cumulative_queries = queries;
      entry.available_queries = static_cast<std::uint64_t>(n_e) * static_cast<std::uint64_t>(t);
      entry.versionspace_size = static_cast<int>(members);
      entry.delta = 0.0;
      entry.p_selected = 1.0;
      if (cfg.evaluate_accuracy)
        entry.test_accuracy =
            system_accuracy_two_stage(pool.scorers[static_cast<std::size_t>(erm_index)], test, panel);
      res.log.push_back(std::move(entry));
    }
  }

  res.selected = erm_index;
  res.total_queries = queries;
  for (std::size_t i = 0; i < members; ++i)
    res.member_errors[i] = sums[i] / static_cast<double>(cfg.horizon);
  return res;
}

}  // namespace bdef
