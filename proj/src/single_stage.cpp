#include "bdef/single_stage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdef {

double sampling_prob_single(const VersionSpace& vs, const HypothesisPool& pool,
                            const LossConfig& cfg, std::span<const double> x, int k,
                            int n_classes) {
  if (k < 0 || k >= cfg.n_experts) throw std::out_of_range("expert index out of range");
  return sampling_prob(vs, pool, cfg, x, n_classes + k);
}

double iw_estimate_single(std::span<const Example> stream,
                          std::span<const SingleRoundRecord> rounds, const LinearScorer& h,
                          const LossConfig& cfg, int n_classes) {
  if (rounds.size() > stream.size()) throw std::invalid_argument("more rounds than stream examples");
  double acc = 0.0;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    const SingleRoundRecord& rec = rounds[t];
    const Example& ex = stream[t];
    if (rec.arm == 0) {
      acc += comp_sum_loss(cfg, h, ex.features, ex.label) / rec.q;
    } else if (rec.queried) {
      const double w = 1.0 / (rec.q * rec.p);
      acc += w * (1.0 - rec.cost) * comp_sum_loss(cfg, h, ex.features, n_classes + rec.arm - 1);
    }
  }
  return acc / static_cast<double>(rounds.size());
}

int weighted_erm_single(std::span<const SingleStageSample> samples, const HypothesisPool& pool,
                        const LossConfig& cfg, int n_classes, std::span<const char> subset) {
  int best = -1;
  double best_value = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!subset.empty() && !subset[i]) continue;
    double value = 0.0;
    for (const SingleStageSample& s : samples) {
      const int decision = s.arm == 0 ? s.y : n_classes + s.arm - 1;
      value += s.weight * (1.0 - s.cost) * comp_sum_loss(cfg, pool.scorers[i], s.x->features, decision);
    }
    if (best < 0 || value < best_value) {
      best = static_cast<int>(i);
      best_value = value;
    }
  }
  if (best < 0) throw std::invalid_argument("erm over an empty member set");
  return best;
}

SingleStageResult run_budgeted_single_stage(const Dataset& stream, const Dataset& test,
                                            const HypothesisPool& pool, ExpertPanel& panel,
                                            const EngineConfig& cfg) {
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (static_cast<std::int64_t>(stream.size()) < cfg.horizon)
    throw std::invalid_argument("stream exhausted: need " + std::to_string(cfg.horizon) +
                                " examples, have " + std::to_string(stream.size()));
  if (pool.size() == 0) throw std::invalid_argument("empty hypothesis pool");

  const int n_classes = panel.n_classes();
  const int n_e = panel.n_experts();
  if (pool.n_decisions != n_classes + n_e)
    throw std::invalid_argument("single-stage pool must have n_classes + n_experts decisions");

  SamplingPolicy policy = cfg.policy.q.empty() ? SamplingPolicy::uniform(n_e + 1) : cfg.policy;
  policy.validate();
  if (static_cast<int>(policy.q.size()) != n_e + 1)
    throw std::invalid_argument("single-stage policy needs n_experts + 1 arms");

  const LossConfig loss = LossConfig::single_stage(n_classes, n_e, pool.score_bound);
  const std::size_t members = pool.size();
  const double q_bar = policy.q_bar();
  const double q_min = policy.q_min();

  auto threshold_at = [&](std::int64_t t, double sum_p) {
    if (cfg.threshold.mode == ThresholdMode::Freedman && t >= 3)
      return freedman_threshold(t, static_cast<std::int64_t>(members), cfg.threshold.delta, q_min,
                                n_e + 1, sum_p);
    return azuma_threshold(t, static_cast<std::int64_t>(members), cfg.threshold.delta, q_bar);
  };

  Rng rng(cfg.seed);
  SingleStageResult res;
  res.version_space = VersionSpace::full(members);
  res.member_errors.assign(members, 0.0);
  res.expert_queries.assign(static_cast<std::size_t>(n_e), 0);
  std::vector<double> sums(members, 0.0);
  std::vector<double> errors(members, 0.0);
  std::vector<double> rows(members * static_cast<std::size_t>(loss.n_decisions), 0.0);
  std::vector<double> p(static_cast<std::size_t>(n_e), 0.0);
  std::vector<char> all_mask(members, 1);
  double sum_p_cum = 0.0;
  std::uint64_t queries = 0;
  int erm_index = 0;
  const std::int64_t cadence = cfg.log_every > 0 ? cfg.log_every : std::max<std::int64_t>(1, cfg.horizon / 200);
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
      const kernels::MinMax mm =
          kernels::column_min_max(rows, loss.n_decisions, n_classes + k, res.version_space.active);
      p[static_cast<std::size_t>(k)] = mm.max - mm.min;
      sum_p_cum += p[static_cast<std::size_t>(k)];
    }

    const int arm = sample_expert(policy, rng);
    double p_sel = 0.0;
    bool queried = false;
    int cost = 0;

    if (arm == 0) {
      ++res.arm0_count;
      const double w = 1.0 / policy.q[0];
      kernels::accumulate_column(rows, loss.n_decisions, ex.label, w, rows_mask, cfg.exec, sums);
    } else {
      const int k = arm - 1;
      p_sel = p[static_cast<std::size_t>(k)];
      queried = rng.uniform() < p_sel;
      if (queried) {
        cost = panel.query_cost(k, ex);
        ++queries;
        ++res.expert_queries[static_cast<std::size_t>(k)];
        const double w = 1.0 / (policy.q[static_cast<std::size_t>(arm)] * p_sel);
        kernels::accumulate_column(rows, loss.n_decisions, n_classes + k, w * (1.0 - cost),
                                   rows_mask, cfg.exec, sums);
      }
    }

    erm_index = kernels::masked_argmin(sums, rows_mask);
    if (cfg.record_history)
      res.history.push_back({arm, queried, policy.q[static_cast<std::size_t>(arm)], p_sel, cost});

    if (t % cadence == 0 || t == cfg.horizon) {
      RoundLogEntry entry;
      entry.t = t;
      entry.cumulative_queries = queries;
      entry.available_queries = static_cast<std::uint64_t>(n_e) * static_cast<std::uint64_t>(t);
      entry.versionspace_size = res.version_space.count();
      entry.delta = threshold_at(t, sum_p_cum);
      entry.p_selected = p_sel;
      entry.arm0_count = res.arm0_count;
      entry.expert_queries = res.expert_queries;
      if (cfg.evaluate_accuracy)
        entry.test_accuracy =
            system_accuracy_single_stage(pool.scorers[static_cast<std::size_t>(erm_index)], test, panel);
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
