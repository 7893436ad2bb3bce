#pragma once

#include <span>
#include <string_view>

#include "bdef/experts.hpp"
#include "bdef/linear_model.hpp"

namespace bdef {

enum class PsiKind { NegLog };

PsiKind psi_from_string(std::string_view name);
std::string_view psi_to_string(PsiKind psi);

// Normalization so the summed surrogate lands in [0,1]: each per-decision
// comp-sum term is divided by norm_factor, which is n_e * ell_max in the
// two-stage setting and (n_e + 1) * ell_max in the single-stage setting,
// with ell_max the worst case of the loss under score clipping.
struct LossConfig {
  PsiKind psi = PsiKind::NegLog;
  int n_decisions = 0;
  int n_experts = 0;
  double score_bound = 1.0;
  double ell_max = 0.0;
  double norm_factor = 1.0;

  static LossConfig two_stage(int n_experts, double score_bound, PsiKind psi = PsiKind::NegLog);
  static LossConfig single_stage(int n_classes, int n_experts, double score_bound,
                                 PsiKind psi = PsiKind::NegLog);
};

// log(1 + (n_decisions - 1) * e^{2B}): maximum of the neg-log comp-sum loss
// over clipped scores.
double max_loss_bound(int n_decisions, double score_bound);

// Psi(softmax_k(clipped scores)) / norm_factor.
double comp_sum_loss(const LossConfig& cfg, const LinearScorer& s, std::span<const double> x, int k);

// sum_k (1 - c_k) * comp_sum_loss(k); in [0,1].
double two_stage_surrogate(const LossConfig& cfg, const LinearScorer& r, std::span<const double> x,
                           const CostVector& costs);

// loss at the label plus the deferral terms; in [0,1].
double single_stage_surrogate(const LossConfig& cfg, const LinearScorer& h, std::span<const double> x,
                              int y, const CostVector& costs);

// Cost of the expert selected by argmax routing.
double two_stage_deferral_loss(const LinearScorer& r, std::span<const double> x, const CostVector& costs);

// 0-1 error if the argmax is a direct prediction, the selected expert's cost otherwise.
double single_stage_deferral_loss(const LinearScorer& h, std::span<const double> x, int y,
                                  const CostVector& costs);

// Mean of 1 - deferral loss over the test set; cost lookups do not touch
// the query budget.
double system_accuracy_two_stage(const LinearScorer& r, const Dataset& test, const ExpertPanel& panel);
double system_accuracy_single_stage(const LinearScorer& h, const Dataset& test, const ExpertPanel& panel);

}  // namespace bdef
