#include "bdef/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "bdef/rng.hpp"

namespace bdef {

Dataset make_synthetic(const SynthSpec& spec) {
  if (spec.n_classes < 2) throw std::invalid_argument("synthetic spec needs at least 2 classes");
  if (spec.n_features < spec.n_classes)
    throw std::invalid_argument("synthetic spec needs n_features >= n_classes");
  if (spec.n_examples < 2) throw std::invalid_argument("synthetic spec needs at least 2 examples");
  if (!(spec.margin > 0.0)) throw std::invalid_argument("synthetic margin must be positive");

  Dataset ds;
  ds.n_classes = spec.n_classes;
  ds.n_features = spec.n_features;
  ds.name = "synthetic";
  ds.label_values.resize(static_cast<std::size_t>(spec.n_classes));
  for (int c = 0; c < spec.n_classes; ++c) ds.label_values[static_cast<std::size_t>(c)] = c + 1;

  // Center of class c sits at margin * e_c.
  Rng rng(spec.seed);
  ds.examples.resize(static_cast<std::size_t>(spec.n_examples));
  for (std::int64_t i = 0; i < spec.n_examples; ++i) {
    Example& ex = ds.examples[static_cast<std::size_t>(i)];
    const int cluster = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.n_classes)));
    ex.features.resize(static_cast<std::size_t>(spec.n_features));
    for (int j = 0; j < spec.n_features; ++j) ex.features[static_cast<std::size_t>(j)] = rng.gaussian();
    ex.features[static_cast<std::size_t>(cluster)] += spec.margin;

    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < spec.n_classes; ++c) {
      double dist = 0.0;
      for (int j = 0; j < spec.n_features; ++j) {
        const double d = ex.features[static_cast<std::size_t>(j)] - (j == c ? spec.margin : 0.0);
        dist += d * d;
      }
      if (dist < best) {
        best = dist;
        nearest = c;
      }
    }
    ex.label = nearest;
    ex.uid = static_cast<std::uint64_t>(i);
  }
  return ds;
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "two_stage_budgeted") return Algorithm::TwoStageBudgeted;
  if (name == "two_stage_baseline") return Algorithm::TwoStageBaseline;
  if (name == "single_stage_budgeted") return Algorithm::SingleStageBudgeted;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

std::string_view algorithm_to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::TwoStageBudgeted: return "two_stage_budgeted";
    case Algorithm::TwoStageBaseline: return "two_stage_baseline";
    case Algorithm::SingleStageBudgeted: return "single_stage_budgeted";
  }
  return "unknown";
}

namespace {

std::vector<RoundLogEntry> run_trial(const RunConfig& cfg, const Dataset& base,
                                     std::uint64_t trial_seed) {
  auto [train_raw, test_raw] = split_train_test(base, cfg.test_fraction, derive_seed(trial_seed, 1));
  const Standardizer stats = Standardizer::fit(train_raw);
  const Dataset train = stats.apply(train_raw);
  const Dataset test = stats.apply(test_raw);

  ExpertPanel panel(base.n_classes, derive_seed(trial_seed, 2));

  PoolOptions pool_opts;
  pool_opts.pool_size = cfg.pool_size;
  pool_opts.l2 = cfg.l2;
  pool_opts.epochs = cfg.pool_epochs;
  pool_opts.step = cfg.pool_step;
  pool_opts.score_bound = cfg.score_bound;
  pool_opts.exec = cfg.parallel ? ExecMode::OpenMP : ExecMode::Serial;

  EngineConfig engine;
  engine.threshold.mode = cfg.threshold;
  engine.threshold.delta = cfg.delta;
  engine.horizon = cfg.horizon;
  engine.seed = derive_seed(trial_seed, 4);
  engine.log_every = cfg.log_every;
  engine.erm_over_full_pool = cfg.erm_over_full_pool;
  engine.exec = cfg.parallel ? ExecMode::OpenMP : ExecMode::Serial;

  if (cfg.algorithm == Algorithm::SingleStageBudgeted) {
    pool_opts.n_decisions = base.n_classes + panel.n_experts();
    pool_opts.target_rule = cfg.target_rule_given ? cfg.target_rule : TargetRule::RandomGaussian;
    const HypothesisPool pool =
        build_hypothesis_pool(train, pool_opts, &panel, derive_seed(trial_seed, 3));
    return run_budgeted_single_stage(train, test, pool, panel, engine).log;
  }

  pool_opts.n_decisions = panel.n_experts();
  pool_opts.target_rule = cfg.target_rule;
  const HypothesisPool pool =
      build_hypothesis_pool(train, pool_opts, &panel, derive_seed(trial_seed, 3));
  if (cfg.algorithm == Algorithm::TwoStageBaseline)
    return run_baseline_two_stage(train, test, pool, panel, engine).log;
  return run_budgeted_two_stage(train, test, pool, panel, engine).log;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
  if (cfg.q_policy != "uniform") throw std::invalid_argument("unknown q policy: " + cfg.q_policy);

  Dataset base;
  if (!cfg.dataset_path.empty()) {
    LoadOptions load;
    load.max_rows = cfg.max_rows;
    load.seed = derive_seed(cfg.master_seed, 0xd5);
    base = load_dataset(cfg.dataset_path, load);
  } else {
    base = make_synthetic(cfg.synth);
  }

  ExperimentResult res;
  res.trial_logs.resize(static_cast<std::size_t>(cfg.trials));
  std::vector<std::string> failures(static_cast<std::size_t>(cfg.trials));

  auto one = [&](int i) {
    try {
      res.trial_logs[static_cast<std::size_t>(i)] =
          run_trial(cfg, base, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i) + 1));
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  };

  if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < cfg.trials; ++i) one(i);
  } else {
    for (int i = 0; i < cfg.trials; ++i) one(i);
  }

  for (int i = 0; i < cfg.trials; ++i)
    if (!failures[static_cast<std::size_t>(i)].empty())
      throw std::runtime_error("trial " + std::to_string(i) + " failed: " +
                               failures[static_cast<std::size_t>(i)]);

  const std::size_t rows = res.trial_logs[0].size();
  for (const auto& log : res.trial_logs)
    if (log.size() != rows) throw std::logic_error("trial logs disagree on the logging grid");

  const double n = static_cast<double>(cfg.trials);
  res.points.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    CurvePoint& pt = res.points[r];
    pt.t = res.trial_logs[0][r].t;
    pt.available = static_cast<double>(res.trial_logs[0][r].available_queries);
    double acc_sum = 0.0;
    for (const auto& log : res.trial_logs) {
      pt.queried += static_cast<double>(log[r].cumulative_queries);
      pt.vs_size += static_cast<double>(log[r].versionspace_size);
      pt.delta += log[r].delta;
      acc_sum += log[r].test_accuracy;
    }
    pt.queried /= n;
    pt.vs_size /= n;
    pt.delta /= n;
    pt.acc_mean = acc_sum / n;
    if (cfg.trials > 1) {
      double sq = 0.0;
      for (const auto& log : res.trial_logs) {
        const double d = log[r].test_accuracy - pt.acc_mean;
        sq += d * d;
      }
      pt.acc_stderr = std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
    }
  }

  if (!cfg.output_path.empty()) emit_csv(res.points, cfg.output_path);
  return res;
}

std::string format_csv(std::span<const CurvePoint> points) {
  std::string out = "t,available,queried,acc_mean,acc_stderr,vs_size,delta\n";
  char buf[256];
  for (const CurvePoint& pt : points) {
    std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  static_cast<long long>(pt.t), pt.available, pt.queried, pt.acc_mean,
                  pt.acc_stderr, pt.vs_size, pt.delta);
    out += buf;
  }
  return out;
}

void emit_csv(std::span<const CurvePoint> points, const std::string& path) {
  if (points.empty()) throw std::invalid_argument("no curve points to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  out << format_csv(points);
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_ll = [&] { return std::stoll(value); };
  auto as_d = [&] { return std::stod(value); };
  auto as_bool = [&] {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("expected a boolean for " + key);
  };

  if (key == "dataset") cfg.dataset_path = value;
  else if (key == "algo") cfg.algorithm = algorithm_from_string(value);
  else if (key == "T" || key == "horizon") cfg.horizon = as_ll();
  else if (key == "delta") cfg.delta = as_d();
  else if (key == "threshold") {
    if (value == "azuma") cfg.threshold = ThresholdMode::Azuma;
    else if (value == "freedman") cfg.threshold = ThresholdMode::Freedman;
    else throw std::invalid_argument("unknown threshold mode: " + value);
  } else if (key == "q_policy") cfg.q_policy = value;
  else if (key == "pool_size") cfg.pool_size = static_cast<int>(as_ll());
  else if (key == "target_rule") {
    if (value == "best_expert") cfg.target_rule = TargetRule::BestExpert;
    else if (value == "random_gaussian") cfg.target_rule = TargetRule::RandomGaussian;
    else throw std::invalid_argument("unknown target rule: " + value);
    cfg.target_rule_given = true;
  } else if (key == "l2") cfg.l2 = as_d();
  else if (key == "score_bound" || key == "B") cfg.score_bound = as_d();
  else if (key == "pool_epochs") cfg.pool_epochs = static_cast<int>(as_ll());
  else if (key == "pool_step") cfg.pool_step = as_d();
  else if (key == "trials") cfg.trials = static_cast<int>(as_ll());
  else if (key == "seed") cfg.master_seed = static_cast<std::uint64_t>(as_ll());
  else if (key == "log_every") cfg.log_every = as_ll();
  else if (key == "test_fraction") cfg.test_fraction = as_d();
  else if (key == "max_rows") cfg.max_rows = as_ll();
  else if (key == "erm_over_full_pool") cfg.erm_over_full_pool = as_bool();
  else if (key == "parallel") cfg.parallel = as_bool();
  else if (key == "out") cfg.output_path = value;
  else if (key == "synth_classes") cfg.synth.n_classes = static_cast<int>(as_ll());
  else if (key == "synth_features") cfg.synth.n_features = static_cast<int>(as_ll());
  else if (key == "synth_examples") cfg.synth.n_examples = as_ll();
  else if (key == "synth_margin") cfg.synth.margin = as_d();
  else if (key == "synth_seed") cfg.synth.seed = static_cast<std::uint64_t>(as_ll());
  else throw std::invalid_argument("unknown config key: " + key);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t\r\n");
      const std::size_t b = s.find_last_not_of(" \t\r\n");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace bdef
