#pragma once

#include <span>

#include "bdef/losses.hpp"
#include "bdef/parallel.hpp"

namespace bdef::kernels {

// Data-parallel per-member sweeps used by the online engines. Every kernel
// has a serial reference path and an OpenMP path over pool members; the two
// are bit-identical because each member writes only its own slots and the
// cross-member folds run serially in index order.

// Normalized comp-sum losses for every decision of every selected member.
// out is row-major pool.size() x cfg.n_decisions; rows of unselected members
// are left untouched.
void member_loss_rows(const HypothesisPool& pool, const LossConfig& cfg,
                      std::span<const double> x, std::span<const char> mask, ExecMode exec,
                      std::span<double> out);

// sums[i] += coeff * rows[i * n_decisions + decision] for masked members.
void accumulate_column(std::span<const double> rows, int n_decisions, int decision, double coeff,
                       std::span<const char> mask, ExecMode exec, std::span<double> sums);

// sums[i] += sum_k (1 - c_k) * comp_sum_loss(member i, x, k); full-information
// update used by the baseline.
void accumulate_two_stage_surrogate(const HypothesisPool& pool, const LossConfig& cfg,
                                    std::span<const double> x, const CostVector& costs,
                                    ExecMode exec, std::span<double> sums);

struct MinMax {
  double min = 0.0;
  double max = 0.0;
};

// Min/max over masked entries of one column of rows; serial index-order scan.
MinMax column_min_max(std::span<const double> rows, int n_decisions, int decision,
                      std::span<const char> mask);

// Lowest masked index attaining the minimum value.
int masked_argmin(std::span<const double> values, std::span<const char> mask);

}  // namespace bdef::kernels
