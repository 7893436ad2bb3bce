#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "bdef/data.hpp"

namespace bdef {

// Synthetic per-class oracle: always correct on its specialty class,
// uniform over all labels elsewhere. Predictions are a pure function of
// (seed, expert id, example uid), so repeated queries are consistent.
struct Expert {
  int id = 0;
  int specialty = 0;
  std::uint64_t seed = 0;
};

struct CostVector {
  std::vector<std::uint8_t> entries;  // one 0/1 cost per expert

  std::size_t size() const { return entries.size(); }
  int operator[](std::size_t k) const { return entries[k]; }
};

std::vector<Expert> make_class_oracle_experts(int n_classes, std::uint64_t seed);

int expert_predict(const Expert& e, const Example& x, int n_classes);

// 0-1 cost: 1 iff the expert's prediction differs from the label.
int expert_cost(const Expert& e, const Example& x, int n_classes);

// Cost oracle with instrumented counters. The budgeted online loop charges
// query_cost / query_cost_vector; pool construction and test-time evaluation
// go through the unbudgeted path.
class ExpertPanel {
 public:
  ExpertPanel(int n_classes, std::uint64_t seed);

  int n_experts() const { return static_cast<int>(experts_.size()); }
  int n_classes() const { return n_classes_; }
  const std::vector<Expert>& experts() const { return experts_; }

  int predict(int k, const Example& x) const;
  int query_cost(int k, const Example& x) const;
  int cost_unbudgeted(int k, const Example& x) const;
  CostVector query_cost_vector(const Example& x) const;
  CostVector cost_vector_unbudgeted(const Example& x) const;

  std::uint64_t budgeted_queries() const { return budgeted_.load(); }
  std::uint64_t unbudgeted_queries() const { return unbudgeted_.load(); }
  void reset_counters();

 private:
  int n_classes_ = 0;
  std::vector<Expert> experts_;
  mutable std::atomic<std::uint64_t> budgeted_{0};
  mutable std::atomic<std::uint64_t> unbudgeted_{0};
};

}  // namespace bdef
