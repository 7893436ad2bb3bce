#include "bdef/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bdef::kernels {

namespace {

// One member's full loss row: clipped scores, then lse(s) - s_k per decision.
void loss_row(const LinearScorer& s, const LossConfig& cfg, std::span<const double> x,
              std::span<double> row) {
  const int d = cfg.n_decisions;
  for (int k = 0; k < d; ++k) row[static_cast<std::size_t>(k)] = s.score(x, k);
  double m = row[0];
  for (int k = 1; k < d; ++k) m = std::max(m, row[static_cast<std::size_t>(k)]);
  double z = 0.0;
  for (int k = 0; k < d; ++k) z += std::exp(row[static_cast<std::size_t>(k)] - m);
  const double lse = m + std::log(z);
  for (int k = 0; k < d; ++k)
    row[static_cast<std::size_t>(k)] = (lse - row[static_cast<std::size_t>(k)]) / cfg.norm_factor;
}

}  // namespace

void member_loss_rows(const HypothesisPool& pool, const LossConfig& cfg,
                      std::span<const double> x, std::span<const char> mask, ExecMode exec,
                      std::span<double> out) {
  const int n = static_cast<int>(pool.size());
  const std::size_t d = static_cast<std::size_t>(cfg.n_decisions);
  if (out.size() < static_cast<std::size_t>(n) * d)
    throw std::invalid_argument("loss row buffer too small");

  if (exec == ExecMode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      loss_row(pool.scorers[static_cast<std::size_t>(i)], cfg, x,
               out.subspan(static_cast<std::size_t>(i) * d, d));
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      loss_row(pool.scorers[static_cast<std::size_t>(i)], cfg, x,
               out.subspan(static_cast<std::size_t>(i) * d, d));
    }
  }
}

void accumulate_column(std::span<const double> rows, int n_decisions, int decision, double coeff,
                       std::span<const char> mask, ExecMode exec, std::span<double> sums) {
  const int n = static_cast<int>(sums.size());
  const std::size_t d = static_cast<std::size_t>(n_decisions);

  if (exec == ExecMode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      sums[static_cast<std::size_t>(i)] +=
          coeff * rows[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(decision)];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      sums[static_cast<std::size_t>(i)] +=
          coeff * rows[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(decision)];
    }
  }
}

void accumulate_two_stage_surrogate(const HypothesisPool& pool, const LossConfig& cfg,
                                    std::span<const double> x, const CostVector& costs,
                                    ExecMode exec, std::span<double> sums) {
  const int n = static_cast<int>(pool.size());

  if (exec == ExecMode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
      sums[static_cast<std::size_t>(i)] +=
          two_stage_surrogate(cfg, pool.scorers[static_cast<std::size_t>(i)], x, costs);
  } else {
    for (int i = 0; i < n; ++i)
      sums[static_cast<std::size_t>(i)] +=
          two_stage_surrogate(cfg, pool.scorers[static_cast<std::size_t>(i)], x, costs);
  }
}

MinMax column_min_max(std::span<const double> rows, int n_decisions, int decision,
                      std::span<const char> mask) {
  const std::size_t d = static_cast<std::size_t>(n_decisions);
  MinMax mm;
  bool seen = false;
  for (std::size_t i = 0; i * d < rows.size(); ++i) {
    if (!mask[i]) continue;
    const double v = rows[i * d + static_cast<std::size_t>(decision)];
    if (!seen) {
      mm.min = mm.max = v;
      seen = true;
    } else {
      mm.min = std::min(mm.min, v);
      mm.max = std::max(mm.max, v);
    }
  }
  if (!seen) throw std::invalid_argument("min/max over an empty member set");
  return mm;
}

int masked_argmin(std::span<const double> values, std::span<const char> mask) {
  int best = -1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) continue;
    if (best < 0 || values[i] < values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  if (best < 0) throw std::invalid_argument("argmin over an empty member set");
  return best;
}

}  // namespace bdef::kernels
