#include "bdef/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bdef/rng.hpp"

namespace bdef {

LinearScorer::LinearScorer(int n_decisions, int n_features, double score_bound)
    : n_decisions_(n_decisions),
      n_features_(n_features),
      bound_(score_bound),
      w_(static_cast<std::size_t>(n_decisions) * static_cast<std::size_t>(n_features), 0.0),
      b_(static_cast<std::size_t>(n_decisions), 0.0) {
  if (n_decisions < 1 || n_features < 1) throw std::invalid_argument("scorer shape must be positive");
  if (!(score_bound > 0.0)) throw std::invalid_argument("score_bound must be positive");
}

double LinearScorer::raw_score(std::span<const double> x, int k) const {
  const double* row = w_.data() + static_cast<std::size_t>(k) * n_features_;
  double acc = b_[static_cast<std::size_t>(k)];
  for (int j = 0; j < n_features_; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
  return acc;
}

double LinearScorer::score(std::span<const double> x, int k) const {
  if (k < 0 || k >= n_decisions_) throw std::out_of_range("decision index out of range");
  return std::clamp(raw_score(x, k), -bound_, bound_);
}

int LinearScorer::predict(std::span<const double> x) const {
  int best = 0;
  double best_score = raw_score(x, 0);
  for (int k = 1; k < n_decisions_; ++k) {
    const double s = raw_score(x, k);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

void LinearScorer::clipped_scores(std::span<const double> x, std::span<double> out) const {
  for (int k = 0; k < n_decisions_; ++k)
    out[static_cast<std::size_t>(k)] = std::clamp(raw_score(x, k), -bound_, bound_);
}

namespace {

void softmax_inplace(std::span<double> s) {
  double m = s[0];
  for (double v : s) m = std::max(m, v);
  double z = 0.0;
  for (double& v : s) {
    v = std::exp(v - m);
    z += v;
  }
  for (double& v : s) v /= z;
}

}  // namespace

LinearScorer train_multinomial_logistic(std::span<const Example> examples,
                                        std::span<const int> targets, int n_decisions,
                                        double l2, int epochs, double step,
                                        std::uint64_t seed, double score_bound) {
  if (examples.empty()) throw std::invalid_argument("empty training set");
  if (targets.size() != examples.size()) throw std::invalid_argument("targets/examples size mismatch");
  if (l2 < 0.0) throw std::invalid_argument("l2 must be nonnegative");
  const int d = static_cast<int>(examples[0].features.size());

  LinearScorer s(n_decisions, d, score_bound);
  Rng rng(seed);
  for (int k = 0; k < n_decisions; ++k)
    for (int j = 0; j < d; ++j) s.weight(k, j) = 0.01 * rng.gaussian();

  const double inv_n = 1.0 / static_cast<double>(examples.size());
  const double shrink = 1.0 / (1.0 + 2.0 * step * l2);
  std::vector<double> grad_w(static_cast<std::size_t>(n_decisions) * d);
  std::vector<double> grad_b(static_cast<std::size_t>(n_decisions));
  std::vector<double> probs(static_cast<std::size_t>(n_decisions));

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const Example& ex = examples[i];
      for (int k = 0; k < n_decisions; ++k) probs[static_cast<std::size_t>(k)] = s.raw_score(ex.features, k);
      softmax_inplace(probs);
      probs[static_cast<std::size_t>(targets[i])] -= 1.0;
      for (int k = 0; k < n_decisions; ++k) {
        const double g = probs[static_cast<std::size_t>(k)] * inv_n;
        grad_b[static_cast<std::size_t>(k)] += g;
        double* gw = grad_w.data() + static_cast<std::size_t>(k) * d;
        for (int j = 0; j < d; ++j) gw[j] += g * ex.features[static_cast<std::size_t>(j)];
      }
    }
    for (int k = 0; k < n_decisions; ++k) {
      s.bias(k) -= step * grad_b[static_cast<std::size_t>(k)];
      for (int j = 0; j < d; ++j)
        s.weight(k, j) = (s.weight(k, j) - step * grad_w[static_cast<std::size_t>(k) * d + j]) * shrink;
    }
  }
  return s;
}

double multinomial_logistic_objective(const LinearScorer& s, std::span<const Example> examples,
                                      std::span<const int> targets, double l2) {
  const int n_decisions = s.n_decisions();
  std::vector<double> scores(static_cast<std::size_t>(n_decisions));
  double loss = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (int k = 0; k < n_decisions; ++k)
      scores[static_cast<std::size_t>(k)] = s.raw_score(examples[i].features, k);
    double m = scores[0];
    for (double v : scores) m = std::max(m, v);
    double z = 0.0;
    for (double v : scores) z += std::exp(v - m);
    loss += m + std::log(z) - scores[static_cast<std::size_t>(targets[i])];
  }
  loss /= static_cast<double>(examples.size());
  double reg = 0.0;
  for (int k = 0; k < n_decisions; ++k)
    for (int j = 0; j < s.n_features(); ++j) reg += s.weight(k, j) * s.weight(k, j);
  return loss + l2 * reg;
}

namespace {

LinearScorer build_member(const Dataset& ds, const PoolOptions& opts, const ExpertPanel* panel,
                          std::uint64_t member_seed) {
  Rng rng(member_seed);

  if (opts.target_rule == TargetRule::RandomGaussian) {
    LinearScorer s(opts.n_decisions, ds.n_features, opts.score_bound);
    for (int k = 0; k < opts.n_decisions; ++k)
      for (int j = 0; j < ds.n_features; ++j) s.weight(k, j) = opts.gaussian_sigma * rng.gaussian();
    return s;
  }

  const std::size_t n = ds.size();
  std::size_t draw = static_cast<std::size_t>(opts.subsample_min) +
                     rng.uniform_int(static_cast<std::uint64_t>(opts.subsample_max - opts.subsample_min + 1));
  draw = std::min(draw, n);

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < draw; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }

  std::vector<Example> sample;
  std::vector<int> targets;
  sample.reserve(draw);
  targets.reserve(draw);
  for (std::size_t i = 0; i < draw; ++i) {
    const Example& ex = ds.examples[idx[i]];
    sample.push_back(ex);
    int target = 0;
    for (int k = 0; k < panel->n_experts(); ++k) {
      if (panel->cost_unbudgeted(k, ex) == 0) {
        target = k;
        break;
      }
    }
    targets.push_back(target);
  }
  return train_multinomial_logistic(sample, targets, opts.n_decisions, opts.l2, opts.epochs,
                                    opts.step, derive_seed(member_seed, 1), opts.score_bound);
}

}  // namespace

HypothesisPool build_hypothesis_pool(const Dataset& ds, const PoolOptions& opts,
                                     const ExpertPanel* panel, std::uint64_t seed) {
  if (opts.pool_size < 2) throw std::invalid_argument("pool_size must be at least 2");
  if (opts.n_decisions < 2) throw std::invalid_argument("pool needs at least 2 decisions");
  if (opts.subsample_min < 1 || opts.subsample_max < opts.subsample_min)
    throw std::invalid_argument("invalid subsample range");
  if (opts.target_rule == TargetRule::BestExpert) {
    if (panel == nullptr) throw std::invalid_argument("best_expert target rule needs an expert panel");
    if (ds.size() < static_cast<std::size_t>(opts.subsample_min))
      throw std::invalid_argument("dataset smaller than minimum subsample size");
  }

  HypothesisPool pool;
  pool.n_decisions = opts.n_decisions;
  pool.n_features = ds.n_features;
  pool.score_bound = opts.score_bound;
  pool.scorers.resize(static_cast<std::size_t>(opts.pool_size));

  if (opts.exec == ExecMode::OpenMP) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < opts.pool_size; ++i)
      pool.scorers[static_cast<std::size_t>(i)] =
          build_member(ds, opts, panel, derive_seed(seed, static_cast<std::uint64_t>(i)));
  } else {
    for (int i = 0; i < opts.pool_size; ++i)
      pool.scorers[static_cast<std::size_t>(i)] =
          build_member(ds, opts, panel, derive_seed(seed, static_cast<std::uint64_t>(i)));
  }
  return pool;
}

void save_pool(const HypothesisPool& pool, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write pool file: " + path);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", pool.score_bound);
  out << "bdefpool 1\n"
      << pool.size() << ' ' << pool.n_decisions << ' ' << pool.n_features << ' ' << buf << '\n';
  for (const LinearScorer& s : pool.scorers) {
    for (int k = 0; k < pool.n_decisions; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", s.bias(k));
      out << buf;
      for (int j = 0; j < pool.n_features; ++j) {
        std::snprintf(buf, sizeof buf, " %.17g", s.weight(k, j));
        out << buf;
      }
      out << '\n';
    }
  }
}

HypothesisPool load_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pool file: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "bdefpool" || version != 1)
    throw std::runtime_error("unrecognized pool format in " + path);

  std::size_t count = 0;
  HypothesisPool pool;
  in >> count >> pool.n_decisions >> pool.n_features >> pool.score_bound;
  if (!in) throw std::runtime_error("truncated pool header in " + path);

  pool.scorers.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LinearScorer s(pool.n_decisions, pool.n_features, pool.score_bound);
    for (int k = 0; k < pool.n_decisions; ++k) {
      in >> s.bias(k);
      for (int j = 0; j < pool.n_features; ++j) in >> s.weight(k, j);
    }
    if (!in) throw std::runtime_error("truncated pool data in " + path);
    pool.scorers.push_back(std::move(s));
  }
  return pool;
}

}  // namespace bdef
