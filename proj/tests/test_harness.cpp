#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bdef/harness.hpp"

using namespace bdef;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.synth.n_classes = 2;
  cfg.synth.n_features = 4;
  cfg.synth.n_examples = 700;
  cfg.synth.margin = 10.0;
  cfg.synth.seed = 3;
  cfg.horizon = 200;
  cfg.trials = 2;
  cfg.pool_size = 6;
  cfg.pool_epochs = 30;
  cfg.log_every = 25;
  cfg.master_seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("make_synthetic is deterministic and margin controls separability") {
  SynthSpec spec;
  spec.n_classes = 3;
  spec.n_features = 4;
  spec.n_examples = 1200;
  spec.margin = 10.0;
  spec.seed = 7;

  const Dataset a = make_synthetic(spec);
  const Dataset b = make_synthetic(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.examples[i].label == b.examples[i].label);
    CHECK(a.examples[i].features == b.examples[i].features);
  }

  auto accuracy_at_margin = [](double margin, std::uint64_t seed) {
    SynthSpec s;
    s.n_classes = 3;
    s.n_features = 4;
    s.n_examples = 1500;
    s.margin = margin;
    s.seed = seed;
    const Dataset ds = make_synthetic(s);
    auto [train_raw, test_raw] = split_train_test(ds, 0.3, 11);
    const Standardizer stats = Standardizer::fit(train_raw);
    const Dataset train = stats.apply(train_raw);
    const Dataset test = stats.apply(test_raw);
    std::vector<int> targets;
    for (const Example& ex : train.examples) targets.push_back(ex.label);
    const LinearScorer s3 =
        train_multinomial_logistic(train.examples, targets, 3, 0.0, 300, 0.5, 1);
    int correct = 0;
    for (const Example& ex : test.examples) correct += s3.predict(ex.features) == ex.label ? 1 : 0;
    return correct / static_cast<double>(test.size());
  };
  // Labels follow the nearest center, so the task stays linearly learnable at
  // any margin; small margins only degrade the boundary estimate.
  CHECK(accuracy_at_margin(10.0, 13) > 0.99);
  CHECK(accuracy_at_margin(0.1, 13) < 0.985);

  SynthSpec bad = spec;
  bad.n_features = 2;  // fewer features than classes
  CHECK_THROWS(make_synthetic(bad));
  bad = spec;
  bad.margin = 0.0;
  CHECK_THROWS(make_synthetic(bad));
}

TEST_CASE("run_experiment with one trial reproduces the single round log") {
  RunConfig cfg = small_config();
  cfg.trials = 1;
  const ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.trial_logs.size() == 1);
  REQUIRE(res.points.size() == res.trial_logs[0].size());
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const RoundLogEntry& entry = res.trial_logs[0][i];
    CHECK(res.points[i].t == entry.t);
    CHECK(res.points[i].queried == static_cast<double>(entry.cumulative_queries));
    CHECK(res.points[i].acc_mean == entry.test_accuracy);
    CHECK(res.points[i].acc_stderr == 0.0);
  }
}

TEST_CASE("baseline curve queries everything that is available") {
  RunConfig cfg = small_config();
  cfg.algorithm = Algorithm::TwoStageBaseline;
  const ExperimentResult res = run_experiment(cfg);
  for (const CurvePoint& pt : res.points) CHECK(pt.queried == pt.available);
}

TEST_CASE("curve columns are monotone and budget-consistent") {
  RunConfig cfg = small_config();
  const ExperimentResult res = run_experiment(cfg);
  double prev_q = 0.0, prev_avail = 0.0;
  for (const CurvePoint& pt : res.points) {
    CHECK(pt.queried >= prev_q);
    CHECK(pt.available >= prev_avail);
    CHECK(pt.queried <= pt.available);
    CHECK(pt.acc_stderr >= 0.0);
    prev_q = pt.queried;
    prev_avail = pt.available;
  }
}

TEST_CASE("aggregated means are independent of trial order") {
  RunConfig cfg = small_config();
  cfg.trials = 3;
  const ExperimentResult res = run_experiment(cfg);
  for (std::size_t r = 0; r < res.points.size(); ++r) {
    double acc = 0.0, queried = 0.0;
    for (auto it = res.trial_logs.rbegin(); it != res.trial_logs.rend(); ++it) {
      acc += (*it)[r].test_accuracy;
      queried += static_cast<double>((*it)[r].cumulative_queries);
    }
    CHECK(res.points[r].acc_mean == doctest::Approx(acc / 3.0).epsilon(1e-12));
    CHECK(res.points[r].queried == doctest::Approx(queried / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("single-stage experiments run through the harness") {
  RunConfig cfg = small_config();
  cfg.algorithm = Algorithm::SingleStageBudgeted;
  cfg.trials = 1;
  const ExperimentResult res = run_experiment(cfg);
  CHECK(!res.points.empty());
  CHECK(res.points.back().queried <= res.points.back().available);
}

TEST_CASE("emit_csv writes deterministic parseable output") {
  std::vector<CurvePoint> points = {{100, 300.0, 42.0, 0.987654321987, 0.00123456789, 7.5, 1.25}};
  const std::string path_a = temp_file("bdef_curve_a.csv");
  const std::string path_b = temp_file("bdef_curve_b.csv");
  emit_csv(points, path_a);
  emit_csv(points, path_b);

  const std::string a = slurp(path_a);
  CHECK(a == slurp(path_b));

  std::istringstream in(a);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "t,available,queried,acc_mean,acc_stderr,vs_size,delta");
  std::getline(in, row);
  CHECK(!row.empty());
  std::string extra;
  CHECK_FALSE(std::getline(in, extra));

  // Round trip: parse the row back and compare at 1e-9.
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= row.size()) {
    const std::size_t comma = row.find(',', pos);
    const std::string tok = row.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    values.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  REQUIRE(values.size() == 7);
  const double expected[7] = {100, 300.0, 42.0, 0.987654321987, 0.00123456789, 7.5, 1.25};
  for (int i = 0; i < 7; ++i)
    CHECK(std::abs(values[static_cast<std::size_t>(i)] - expected[i]) <=
          1e-9 * std::max(1.0, std::abs(expected[i])));

  CHECK_THROWS(emit_csv({}, path_a));
}

TEST_CASE("identical configs produce byte-identical csv files") {
  RunConfig cfg = small_config();
  cfg.output_path = temp_file("bdef_rerun_a.csv");
  run_experiment(cfg);
  RunConfig cfg2 = small_config();
  cfg2.output_path = temp_file("bdef_rerun_b.csv");
  run_experiment(cfg2);
  CHECK(slurp(cfg.output_path) == slurp(cfg2.output_path));
}

TEST_CASE("concurrent trials leave the aggregated output unchanged") {
  RunConfig cfg = small_config();
  cfg.trials = 3;
  cfg.output_path = temp_file("bdef_par_off.csv");
  run_experiment(cfg);
  cfg.parallel = true;
  cfg.output_path = temp_file("bdef_par_on.csv");
  run_experiment(cfg);
  CHECK(slurp(temp_file("bdef_par_off.csv")) == slurp(temp_file("bdef_par_on.csv")));
}

TEST_CASE("config files parse with overrides taking precedence") {
  const std::string path = temp_file("bdef_config.cfg");
  std::ofstream out(path);
  out << "# experiment setup\n"
      << "algo = two_stage_baseline\n"
      << "T = 500\n"
      << "delta = 0.2\n"
      << "threshold = freedman\n"
      << "pool_size = 12\n"
      << "target_rule = random_gaussian\n"
      << "synth_classes = 4\n"
      << "parallel = true\n";
  out.close();

  RunConfig cfg = load_config_file(path);
  CHECK(cfg.algorithm == Algorithm::TwoStageBaseline);
  CHECK(cfg.horizon == 500);
  CHECK(cfg.delta == doctest::Approx(0.2));
  CHECK(cfg.threshold == ThresholdMode::Freedman);
  CHECK(cfg.pool_size == 12);
  CHECK(cfg.target_rule == TargetRule::RandomGaussian);
  CHECK(cfg.target_rule_given);
  CHECK(cfg.synth.n_classes == 4);
  CHECK(cfg.parallel);

  apply_config_entry(cfg, "T", "900");  // command-line style override
  CHECK(cfg.horizon == 900);

  CHECK_THROWS(apply_config_entry(cfg, "nonsense", "1"));
  CHECK_THROWS(apply_config_entry(cfg, "threshold", "bogus"));
  CHECK_THROWS(apply_config_entry(cfg, "algo", "bogus"));

  const std::string bad = temp_file("bdef_config_bad.cfg");
  std::ofstream bout(bad);
  bout << "just words\n";
  bout.close();
  CHECK_THROWS(load_config_file(bad));
}

TEST_CASE("run_experiment validates its configuration") {
  RunConfig cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS(run_experiment(cfg));
  cfg = small_config();
  cfg.delta = 1.5;
  CHECK_THROWS(run_experiment(cfg));
  cfg = small_config();
  cfg.q_policy = "inverse";
  CHECK_THROWS(run_experiment(cfg));
  cfg = small_config();
  cfg.horizon = 100000;  // larger than the train split
  CHECK_THROWS(run_experiment(cfg));
}
