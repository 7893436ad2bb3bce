#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bdef/data.hpp"
#include "bdef/rng.hpp"

using namespace bdef;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const std::string& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("parse_sparse_line reads labels and pairs") {
  auto [label, pairs] = parse_sparse_line("2 1:0.5 4:-1.25");
  CHECK(label == 2);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].index == 1);
  CHECK(pairs[0].value == doctest::Approx(0.5));
  CHECK(pairs[1].index == 4);
  CHECK(pairs[1].value == doctest::Approx(-1.25));
}

TEST_CASE("parse_sparse_line accepts an empty feature list") {
  auto [label, pairs] = parse_sparse_line("1");
  CHECK(label == 1);
  CHECK(pairs.empty());
}

TEST_CASE("parse_sparse_line handles scientific notation") {
  auto [label, pairs] = parse_sparse_line("3 2:1e-3");
  CHECK(label == 3);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].index == 2);
  CHECK(pairs[0].value == doctest::Approx(0.001));
}

TEST_CASE("parse_sparse_line rejects malformed input with a column") {
  CHECK_THROWS_AS(parse_sparse_line(""), ParseError);
  CHECK_THROWS_AS(parse_sparse_line("x 1:2"), ParseError);
  CHECK_THROWS_AS(parse_sparse_line("1 3:1 2:1"), ParseError);  // non-increasing
  CHECK_THROWS_AS(parse_sparse_line("1 0:1"), ParseError);      // index < 1
  CHECK_THROWS_AS(parse_sparse_line("1 2:abc"), ParseError);
  CHECK_THROWS_AS(parse_sparse_line("1 2"), ParseError);
  CHECK_THROWS_AS(parse_sparse_line("1 2:inf"), ParseError);  // features must stay finite
  CHECK_THROWS_AS(parse_sparse_line("1 2:nan"), ParseError);
  CHECK_THROWS_WITH(parse_sparse_line("1 3:1 2:1"), doctest::Contains("column"));
}

TEST_CASE("sparse line round trip preserves pairs") {
  Rng rng(99);
  for (int it = 0; it < 200; ++it) {
    const long long label = static_cast<long long>(rng.uniform_int(19)) - 9;
    std::vector<SparsePair> pairs;
    int index = 0;
    const int count = static_cast<int>(rng.uniform_int(6));
    for (int i = 0; i < count; ++i) {
      index += 1 + static_cast<int>(rng.uniform_int(4));
      double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.uniform_int(7)) - 3.0);
      if (v == 0.0) v = 1.0;
      pairs.push_back({index, v});
    }
    const std::string line = format_sparse_line(label, pairs);
    auto [l2, p2] = parse_sparse_line(line);
    CHECK(l2 == label);
    REQUIRE(p2.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(p2[i].index == pairs[i].index);
      CHECK(p2[i].value == pairs[i].value);  // %.17g round-trips exactly
    }
  }
}

TEST_CASE("load_dataset remaps labels preserving sorted order") {
  const std::string path = temp_file("bdef_load1.txt");
  write_lines(path, {"-1 1:1.0", "+1 2:2.0", "-1 1:0.5 3:1.5"});
  const Dataset ds = load_dataset(path);
  CHECK(ds.n_classes == 2);
  CHECK(ds.label_values == std::vector<long long>{-1, 1});
  CHECK(ds.examples[0].label == 0);
  CHECK(ds.examples[1].label == 1);
  CHECK(ds.examples[2].label == 0);

  const std::string path2 = temp_file("bdef_load2.txt");
  write_lines(path2, {"7 1:1", "1 1:1", "3 1:1"});
  const Dataset ds2 = load_dataset(path2);
  CHECK(ds2.label_values == std::vector<long long>{1, 3, 7});
  CHECK(ds2.examples[0].label == 2);
  CHECK(ds2.examples[1].label == 0);
  CHECK(ds2.examples[2].label == 1);
}

TEST_CASE("load_dataset infers the feature count from the maximum index") {
  const std::string path = temp_file("bdef_load3.txt");
  write_lines(path, {"1 2:1.0", "2 5:2.0", "1 1:3.0"});
  const Dataset ds = load_dataset(path);
  CHECK(ds.n_features == 5);
  CHECK(ds.examples[1].features[4] == doctest::Approx(2.0));
  CHECK(ds.examples[1].features[0] == 0.0);
}

TEST_CASE("load_dataset rejects unreadable and empty files") {
  CHECK_THROWS(load_dataset(temp_file("bdef_does_not_exist.txt")));
  const std::string path = temp_file("bdef_empty.txt");
  write_lines(path, {});
  CHECK_THROWS(load_dataset(path));
}

TEST_CASE("parser tolerates extra whitespace and skips blank lines on load") {
  auto [label, pairs] = parse_sparse_line("  1\t 2:3.5   4:1 ");
  CHECK(label == 1);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[1].index == 4);

  const std::string path = temp_file("bdef_blank.txt");
  write_lines(path, {"1 1:1.0", "", "   ", "2 1:2.0"});
  CHECK(load_dataset(path).size() == 2);
}

TEST_CASE("split clamps tiny fractions so both parts stay nonempty") {
  Dataset ds;
  ds.n_classes = 2;
  ds.n_features = 1;
  for (int i = 0; i < 10; ++i) ds.examples.push_back({{1.0 * i}, i % 2, static_cast<std::uint64_t>(i)});
  auto [train, test] = split_train_test(ds, 0.01, 3);
  CHECK(test.size() == 1);
  CHECK(train.size() == 9);
}

TEST_CASE("load_dataset rejects indices beyond a declared feature count") {
  const std::string path = temp_file("bdef_load5.txt");
  write_lines(path, {"1 2:1.0", "2 7:2.0"});
  LoadOptions opts;
  opts.n_features = 5;
  CHECK_THROWS(load_dataset(path, opts));
  opts.n_features = 7;
  CHECK(load_dataset(path, opts).n_features == 7);
}

TEST_CASE("load_dataset max_rows takes a seeded uniform subsample") {
  const std::string path = temp_file("bdef_load4.txt");
  std::vector<std::string> lines;
  for (int i = 0; i < 50; ++i) lines.push_back("1 1:" + std::to_string(i));
  write_lines(path, lines);
  LoadOptions opts;
  opts.max_rows = 10;
  opts.seed = 3;
  const Dataset a = load_dataset(path, opts);
  const Dataset b = load_dataset(path, opts);
  CHECK(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.examples[i].features[0] == b.examples[i].features[0]);
}

TEST_CASE("standardize_features centers, scales and caps the norm") {
  Dataset ds;
  ds.n_classes = 2;
  ds.n_features = 1;
  ds.examples = {{{0.0}, 0, 0}, {{2.0}, 1, 1}};
  const Dataset out = standardize_features(ds);
  CHECK(out.examples[0].features[0] == doctest::Approx(-1.0));
  CHECK(out.examples[1].features[0] == doctest::Approx(1.0));
}

TEST_CASE("standardize_features maps constant columns to zero") {
  Dataset ds;
  ds.n_classes = 2;
  ds.n_features = 1;
  ds.examples = {{{5.0}, 0, 0}, {{5.0}, 1, 1}};
  const Dataset out = standardize_features(ds);
  CHECK(out.examples[0].features[0] == 0.0);
  CHECK(out.examples[1].features[0] == 0.0);
}

TEST_CASE("standardize_features ends with max norm exactly 1") {
  Dataset ds;
  ds.n_classes = 2;
  ds.n_features = 2;
  ds.examples = {{{3.0, 0.0}, 0, 0}, {{0.0, 4.0}, 1, 1}};
  const Dataset out = standardize_features(ds);
  double max_norm = 0.0;
  for (const Example& ex : out.examples) {
    double n = 0.0;
    for (double v : ex.features) n += v * v;
    max_norm = std::max(max_norm, std::sqrt(n));
  }
  CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardization invariants hold on random data") {
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    Dataset ds;
    ds.n_classes = 2;
    ds.n_features = 4;
    const int n = 50 + static_cast<int>(rng.uniform_int(100));
    for (int i = 0; i < n; ++i) {
      Example ex;
      ex.uid = static_cast<std::uint64_t>(i);
      ex.label = static_cast<int>(rng.uniform_int(2));
      for (int j = 0; j < 4; ++j) ex.features.push_back(rng.gaussian() * (j + 1) + j);
      ds.examples.push_back(std::move(ex));
    }
    const Standardizer stats = Standardizer::fit(ds);
    const Dataset out = stats.apply(ds);

    // Unit variance holds before the norm scaling; divide the scaling back out.
    const double var_scale = stats.norm_scale * stats.norm_scale;
    for (int j = 0; j < 4; ++j) {
      double mean = 0.0;
      for (const Example& ex : out.examples) mean += ex.features[static_cast<std::size_t>(j)];
      mean /= n;
      CHECK(std::abs(mean) < 1e-9);
      double var = 0.0;
      for (const Example& ex : out.examples) {
        const double c = ex.features[static_cast<std::size_t>(j)] - mean;
        var += c * c;
      }
      var /= n;
      CHECK(std::abs(var / var_scale - 1.0) < 1e-6);
    }
    double max_norm = 0.0;
    for (const Example& ex : out.examples) {
      double nn = 0.0;
      for (double v : ex.features) nn += v * v;
      max_norm = std::max(max_norm, std::sqrt(nn));
    }
    CHECK(max_norm <= 1.0);
    CHECK(max_norm >= 1.0 - 1e-12);
  }
}

TEST_CASE("split_train_test sizes and determinism") {
  Dataset ds;
  ds.n_classes = 2;
  ds.n_features = 1;
  for (int i = 0; i < 10; ++i) ds.examples.push_back({{static_cast<double>(i)}, i % 2, static_cast<std::uint64_t>(i)});

  auto [train, test] = split_train_test(ds, 0.3, 7);
  CHECK(train.size() == 7);
  CHECK(test.size() == 3);

  auto [train2, test2] = split_train_test(ds, 0.3, 7);
  for (std::size_t i = 0; i < train.size(); ++i)
    CHECK(train.examples[i].features[0] == train2.examples[i].features[0]);
  for (std::size_t i = 0; i < test.size(); ++i)
    CHECK(test.examples[i].features[0] == test2.examples[i].features[0]);

  // Disjoint partition.
  std::vector<double> seen;
  for (const Example& ex : train.examples) seen.push_back(ex.features[0]);
  for (const Example& ex : test.examples) seen.push_back(ex.features[0]);
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 10; ++i) CHECK(seen[static_cast<std::size_t>(i)] == doctest::Approx(i));

  // uids are tagged per split.
  CHECK((train.examples[0].uid & kTrainSplitTag) == kTrainSplitTag);
  CHECK((test.examples[0].uid & kTestSplitTag) == kTestSplitTag);
}

TEST_CASE("different seeds give different splits") {
  Dataset ds;
  ds.n_classes = 2;
  ds.n_features = 1;
  for (int i = 0; i < 60; ++i) ds.examples.push_back({{static_cast<double>(i)}, i % 2, static_cast<std::uint64_t>(i)});
  auto [train1, test1] = split_train_test(ds, 0.5, 1);
  auto [train2, test2] = split_train_test(ds, 0.5, 2);
  bool differ = false;
  for (std::size_t i = 0; i < test1.size() && !differ; ++i)
    differ = test1.examples[i].features[0] != test2.examples[i].features[0];
  CHECK(differ);
}

TEST_CASE("split rejects out-of-range fractions") {
  Dataset ds;
  ds.n_classes = 2;
  ds.n_features = 1;
  for (int i = 0; i < 4; ++i) ds.examples.push_back({{1.0}, 0, static_cast<std::uint64_t>(i)});
  CHECK_THROWS(split_train_test(ds, 0.0, 1));
  CHECK_THROWS(split_train_test(ds, 1.0, 1));
  CHECK_THROWS(split_train_test(ds, -0.5, 1));
}
