// Benchmarks the per-member loss kernels in serial and OpenMP mode on the
// same workload and checks that both modes produce identical bits.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "bdef/harness.hpp"
#include "bdef/kernels.hpp"
#include "bdef/rng.hpp"

using namespace bdef;

namespace {

double run_sweeps(const HypothesisPool& pool, const LossConfig& cfg, const Dataset& ds,
                  ExecMode exec, int sweeps, std::vector<double>& rows) {
  const std::vector<char> mask(pool.size(), 1);
  const auto start = std::chrono::steady_clock::now();
  double checksum = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    const Example& ex = ds.examples[static_cast<std::size_t>(s) % ds.size()];
    kernels::member_loss_rows(pool, cfg, ex.features, mask, exec, rows);
    checksum += rows[static_cast<std::size_t>(s) % rows.size()];
  }
  const auto stop = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
  std::printf("  %-8s %8.1f ms  (%.2f sweeps/ms, checksum %.6f)\n",
              exec == ExecMode::Serial ? "serial" : "openmp", ms, sweeps / ms, checksum);
  return ms;
}

}  // namespace

int main() {
  SynthSpec spec;
  spec.n_classes = 10;
  spec.n_features = 32;
  spec.n_examples = 2000;
  spec.seed = 7;
  const Dataset ds = standardize_features(make_synthetic(spec));

  PoolOptions opts;
  opts.pool_size = 256;
  opts.n_decisions = spec.n_classes;
  opts.target_rule = TargetRule::RandomGaussian;
  const HypothesisPool pool = build_hypothesis_pool(ds, opts, nullptr, 11);
  const LossConfig cfg = LossConfig::two_stage(spec.n_classes, pool.score_bound);

  std::printf("member_loss_rows: %zu members x %d decisions x %d features\n", pool.size(),
              cfg.n_decisions, ds.n_features);
  const int sweeps = 3000;
  std::vector<double> rows_serial(pool.size() * static_cast<std::size_t>(cfg.n_decisions));
  std::vector<double> rows_omp(rows_serial.size());

  const double t_serial = run_sweeps(pool, cfg, ds, ExecMode::Serial, sweeps, rows_serial);
  const double t_omp = run_sweeps(pool, cfg, ds, ExecMode::OpenMP, sweeps, rows_omp);
  std::printf("  speedup  %8.2fx over %d threads\n", t_serial / t_omp, max_threads());

  double max_diff = 0.0;
  for (std::size_t i = 0; i < rows_serial.size(); ++i)
    max_diff = std::max(max_diff, std::abs(rows_serial[i] - rows_omp[i]));
  std::printf("  max |serial - openmp| = %g\n", max_diff);
  if (max_diff != 0.0) {
    std::printf("  MISMATCH: modes are expected to be bit-identical\n");
    return 1;
  }

  // Full engine comparison: same run under both modes must agree exactly.
  auto [train, test] = split_train_test(ds, 0.3, 5);
  ExpertPanel panel_a(spec.n_classes, 21), panel_b(spec.n_classes, 21);
  PoolOptions small = opts;
  small.pool_size = 64;
  const HypothesisPool engine_pool = build_hypothesis_pool(train, small, nullptr, 13);

  EngineConfig ecfg;
  ecfg.horizon = std::min<std::int64_t>(1000, static_cast<std::int64_t>(train.size()));
  ecfg.seed = 17;
  ecfg.evaluate_accuracy = false;

  const auto t0 = std::chrono::steady_clock::now();
  ecfg.exec = ExecMode::Serial;
  const TwoStageResult serial = run_budgeted_two_stage(train, test, engine_pool, panel_a, ecfg);
  const auto t1 = std::chrono::steady_clock::now();
  ecfg.exec = ExecMode::OpenMP;
  const TwoStageResult omp = run_budgeted_two_stage(train, test, engine_pool, panel_b, ecfg);
  const auto t2 = std::chrono::steady_clock::now();

  std::printf("two_stage engine (%lld rounds, %zu members):\n",
              static_cast<long long>(ecfg.horizon), engine_pool.size());
  std::printf("  serial   %8.1f ms\n", std::chrono::duration<double, std::milli>(t1 - t0).count());
  std::printf("  openmp   %8.1f ms\n", std::chrono::duration<double, std::milli>(t2 - t1).count());
  const bool same = serial.selected == omp.selected &&
                    serial.total_queries == omp.total_queries &&
                    serial.member_errors == omp.member_errors;
  std::printf("  results identical: %s\n", same ? "yes" : "NO");
  return same ? 0 : 1;
}
