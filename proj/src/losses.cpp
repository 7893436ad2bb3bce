#include "bdef/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bdef {

PsiKind psi_from_string(std::string_view name) {
  if (name == "neg_log") return PsiKind::NegLog;
  throw std::invalid_argument("unknown psi transform: " + std::string(name));
}

std::string_view psi_to_string(PsiKind) { return "neg_log"; }

double max_loss_bound(int n_decisions, double score_bound) {
  return std::log(1.0 + (n_decisions - 1) * std::exp(2.0 * score_bound));
}

LossConfig LossConfig::two_stage(int n_experts, double score_bound, PsiKind psi) {
  if (n_experts < 2) throw std::invalid_argument("two-stage loss needs at least 2 experts");
  LossConfig cfg;
  cfg.psi = psi;
  cfg.n_decisions = n_experts;
  cfg.n_experts = n_experts;
  cfg.score_bound = score_bound;
  cfg.ell_max = max_loss_bound(n_experts, score_bound);
  cfg.norm_factor = n_experts * cfg.ell_max;
  return cfg;
}

LossConfig LossConfig::single_stage(int n_classes, int n_experts, double score_bound, PsiKind psi) {
  if (n_classes < 2 || n_experts < 1)
    throw std::invalid_argument("single-stage loss needs n_classes >= 2 and n_experts >= 1");
  LossConfig cfg;
  cfg.psi = psi;
  cfg.n_decisions = n_classes + n_experts;
  cfg.n_experts = n_experts;
  cfg.score_bound = score_bound;
  cfg.ell_max = max_loss_bound(cfg.n_decisions, score_bound);
  cfg.norm_factor = (n_experts + 1) * cfg.ell_max;
  return cfg;
}

namespace {

// Raw neg-log comp-sum loss at decision k from clipped scores:
// logsumexp(s) - s_k = log(1 + sum_{k' != k} e^{s_{k'} - s_k}).
double raw_neg_log_loss(std::span<const double> scores, int k) {
  double m = scores[0];
  for (double v : scores) m = std::max(m, v);
  double z = 0.0;
  for (double v : scores) z += std::exp(v - m);
  return m + std::log(z) - scores[static_cast<std::size_t>(k)];
}

void check_costs(const CostVector& costs, std::size_t expected) {
  if (costs.size() != expected) throw std::invalid_argument("cost vector size mismatch");
  for (std::uint8_t c : costs.entries)
    if (c > 1) throw std::invalid_argument("cost entries must be 0 or 1");
}

}  // namespace

double comp_sum_loss(const LossConfig& cfg, const LinearScorer& s, std::span<const double> x, int k) {
  if (k < 0 || k >= cfg.n_decisions) throw std::out_of_range("decision index out of range");
  std::vector<double> scores(static_cast<std::size_t>(cfg.n_decisions));
  s.clipped_scores(x, scores);
  switch (cfg.psi) {
    case PsiKind::NegLog:
      return raw_neg_log_loss(scores, k) / cfg.norm_factor;
  }
  throw std::logic_error("unhandled psi transform");
}

double two_stage_surrogate(const LossConfig& cfg, const LinearScorer& r, std::span<const double> x,
                           const CostVector& costs) {
  check_costs(costs, static_cast<std::size_t>(cfg.n_experts));
  std::vector<double> scores(static_cast<std::size_t>(cfg.n_decisions));
  r.clipped_scores(x, scores);
  double acc = 0.0;
  for (int k = 0; k < cfg.n_experts; ++k) {
    if (costs[static_cast<std::size_t>(k)] != 0) continue;
    acc += raw_neg_log_loss(scores, k) / cfg.norm_factor;
  }
  return acc;
}

double single_stage_surrogate(const LossConfig& cfg, const LinearScorer& h, std::span<const double> x,
                              int y, const CostVector& costs) {
  check_costs(costs, static_cast<std::size_t>(cfg.n_experts));
  const int n_classes = cfg.n_decisions - cfg.n_experts;
  if (y < 0 || y >= n_classes) throw std::out_of_range("label out of range");
  std::vector<double> scores(static_cast<std::size_t>(cfg.n_decisions));
  h.clipped_scores(x, scores);
  double acc = raw_neg_log_loss(scores, y) / cfg.norm_factor;
  for (int k = 0; k < cfg.n_experts; ++k) {
    if (costs[static_cast<std::size_t>(k)] != 0) continue;
    acc += raw_neg_log_loss(scores, n_classes + k) / cfg.norm_factor;
  }
  return acc;
}

double two_stage_deferral_loss(const LinearScorer& r, std::span<const double> x,
                               const CostVector& costs) {
  return static_cast<double>(costs[static_cast<std::size_t>(r.predict(x))]);
}

double single_stage_deferral_loss(const LinearScorer& h, std::span<const double> x, int y,
                                  const CostVector& costs) {
  const int n_classes = h.n_decisions() - static_cast<int>(costs.size());
  const int choice = h.predict(x);
  if (choice < n_classes) return choice != y ? 1.0 : 0.0;
  return static_cast<double>(costs[static_cast<std::size_t>(choice - n_classes)]);
}

double system_accuracy_two_stage(const LinearScorer& r, const Dataset& test,
                                 const ExpertPanel& panel) {
  if (test.examples.empty()) throw std::invalid_argument("empty test set");
  double acc = 0.0;
  for (const Example& ex : test.examples) {
    const int k = r.predict(ex.features);
    acc += 1.0 - static_cast<double>(panel.cost_unbudgeted(k, ex));
  }
  return acc / static_cast<double>(test.size());
}

double system_accuracy_single_stage(const LinearScorer& h, const Dataset& test,
                                    const ExpertPanel& panel) {
  if (test.examples.empty()) throw std::invalid_argument("empty test set");
  const int n_classes = panel.n_classes();
  double acc = 0.0;
  for (const Example& ex : test.examples) {
    const int choice = h.predict(ex.features);
    if (choice < n_classes)
      acc += choice == ex.label ? 1.0 : 0.0;
    else
      acc += 1.0 - static_cast<double>(panel.cost_unbudgeted(choice - n_classes, ex));
  }
  return acc / static_cast<double>(test.size());
}

}  // namespace bdef
