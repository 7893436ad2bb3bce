#include "bdef/experts.hpp"

#include <stdexcept>

#include "bdef/rng.hpp"

namespace bdef {

namespace {

// Unbiased map of a 64-bit hash onto [0, n) via the high multiply.
int bounded(std::uint64_t h, int n) {
  return static_cast<int>((static_cast<unsigned __int128>(h) * static_cast<unsigned __int128>(n)) >> 64);
}

}  // namespace

std::vector<Expert> make_class_oracle_experts(int n_classes, std::uint64_t seed) {
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes for oracle experts");
  std::vector<Expert> experts(static_cast<std::size_t>(n_classes));
  for (int k = 0; k < n_classes; ++k)
    experts[static_cast<std::size_t>(k)] = {k, k, derive_seed(seed, static_cast<std::uint64_t>(k))};
  return experts;
}

int expert_predict(const Expert& e, const Example& x, int n_classes) {
  if (x.label == e.specialty) return x.label;
  const std::uint64_t h = splitmix64(e.seed ^ splitmix64(x.uid));
  return bounded(h, n_classes);
}

int expert_cost(const Expert& e, const Example& x, int n_classes) {
  return expert_predict(e, x, n_classes) != x.label ? 1 : 0;
}

ExpertPanel::ExpertPanel(int n_classes, std::uint64_t seed)
    : n_classes_(n_classes), experts_(make_class_oracle_experts(n_classes, seed)) {}

int ExpertPanel::predict(int k, const Example& x) const {
  return expert_predict(experts_[static_cast<std::size_t>(k)], x, n_classes_);
}

int ExpertPanel::query_cost(int k, const Example& x) const {
  budgeted_.fetch_add(1, std::memory_order_relaxed);
  return expert_cost(experts_[static_cast<std::size_t>(k)], x, n_classes_);
}

int ExpertPanel::cost_unbudgeted(int k, const Example& x) const {
  unbudgeted_.fetch_add(1, std::memory_order_relaxed);
  return expert_cost(experts_[static_cast<std::size_t>(k)], x, n_classes_);
}

CostVector ExpertPanel::query_cost_vector(const Example& x) const {
  CostVector c;
  c.entries.resize(experts_.size());
  for (std::size_t k = 0; k < experts_.size(); ++k)
    c.entries[k] = static_cast<std::uint8_t>(query_cost(static_cast<int>(k), x));
  return c;
}

CostVector ExpertPanel::cost_vector_unbudgeted(const Example& x) const {
  CostVector c;
  c.entries.resize(experts_.size());
  for (std::size_t k = 0; k < experts_.size(); ++k)
    c.entries[k] = static_cast<std::uint8_t>(cost_unbudgeted(static_cast<int>(k), x));
  return c;
}

void ExpertPanel::reset_counters() {
  budgeted_.store(0);
  unbudgeted_.store(0);
}

}  // namespace bdef
