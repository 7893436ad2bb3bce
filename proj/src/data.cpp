#include "bdef/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>

#include "bdef/rng.hpp"

namespace bdef {

namespace {

[[noreturn]] void fail(std::size_t column, const std::string& what) {
  throw ParseError("column " + std::to_string(column + 1) + ": " + what);
}

std::string_view next_token(std::string_view line, std::size_t& pos) {
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  const std::size_t start = pos;
  while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
  return line.substr(start, pos - start);
}

}  // namespace

std::pair<long long, std::vector<SparsePair>> parse_sparse_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);

  std::size_t pos = 0;
  const std::string_view label_tok = next_token(line, pos);
  if (label_tok.empty()) fail(0, "missing label");

  std::string buf(label_tok);
  char* end = nullptr;
  const long long label = std::strtoll(buf.c_str(), &end, 10);
  if (end == buf.c_str() || *end != '\0') fail(pos - label_tok.size(), "malformed label '" + buf + "'");

  std::vector<SparsePair> pairs;
  int prev_index = 0;
  for (;;) {
    const std::size_t tok_start = pos;
    const std::string_view tok = next_token(line, pos);
    if (tok.empty()) break;
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
      fail(tok_start, "malformed pair '" + std::string(tok) + "'");

    buf.assign(tok.substr(0, colon));
    const long long index = std::strtoll(buf.c_str(), &end, 10);
    if (end == buf.c_str() || *end != '\0')
      fail(tok_start, "malformed index '" + buf + "'");
    if (index < 1) fail(tok_start, "index must be >= 1");
    if (index <= prev_index)
      fail(tok_start, "non-increasing index " + std::to_string(index));

    buf.assign(tok.substr(colon + 1));
    const double value = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str() || *end != '\0' || !std::isfinite(value))
      fail(tok_start + colon + 1, "non-numeric value '" + buf + "'");

    pairs.push_back({static_cast<int>(index), value});
    prev_index = static_cast<int>(index);
  }
  return {label, std::move(pairs)};
}

std::string format_sparse_line(long long label, std::span<const SparsePair> pairs) {
  std::string out = std::to_string(label);
  char buf[64];
  for (const SparsePair& p : pairs) {
    std::snprintf(buf, sizeof buf, " %d:%.17g", p.index, p.value);
    out += buf;
  }
  return out;
}

Dataset load_dataset(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::vector<long long> raw_labels;
  std::vector<std::vector<SparsePair>> rows;
  std::string line;
  std::size_t line_no = 0;
  int max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      auto [label, pairs] = parse_sparse_line(line);
      if (!pairs.empty()) max_index = std::max(max_index, pairs.back().index);
      raw_labels.push_back(label);
      rows.push_back(std::move(pairs));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rows.empty()) throw std::runtime_error("empty dataset file: " + path);

  if (opts.max_rows > 0 && static_cast<std::int64_t>(rows.size()) > opts.max_rows) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(opts.seed);
    rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(opts.max_rows));
    std::sort(idx.begin(), idx.end());
    std::vector<long long> sub_labels;
    std::vector<std::vector<SparsePair>> sub_rows;
    sub_labels.reserve(idx.size());
    sub_rows.reserve(idx.size());
    for (std::size_t i : idx) {
      sub_labels.push_back(raw_labels[i]);
      sub_rows.push_back(std::move(rows[i]));
    }
    raw_labels = std::move(sub_labels);
    rows = std::move(sub_rows);
  }

  const int n_features = opts.n_features > 0 ? opts.n_features : max_index;
  if (opts.n_features > 0 && max_index > opts.n_features)
    throw std::runtime_error("feature index " + std::to_string(max_index) +
                             " exceeds declared n_features in " + path);

  std::map<long long, int> remap;
  for (long long l : raw_labels) remap.emplace(l, 0);
  Dataset ds;
  ds.label_values.reserve(remap.size());
  for (auto& [orig, mapped] : remap) {
    mapped = static_cast<int>(ds.label_values.size());
    ds.label_values.push_back(orig);
  }
  ds.n_classes = static_cast<int>(ds.label_values.size());
  ds.n_features = n_features;
  ds.name = path;

  ds.examples.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Example& ex = ds.examples[i];
    ex.features.assign(static_cast<std::size_t>(n_features), 0.0);
    for (const SparsePair& p : rows[i]) ex.features[static_cast<std::size_t>(p.index - 1)] = p.value;
    ex.label = remap.at(raw_labels[i]);
    ex.uid = i;
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  std::vector<SparsePair> pairs;
  for (const Example& ex : ds.examples) {
    pairs.clear();
    for (int j = 0; j < ds.n_features; ++j) {
      const double v = ex.features[static_cast<std::size_t>(j)];
      if (v != 0.0) pairs.push_back({j + 1, v});
    }
    const long long label = ex.label < static_cast<int>(ds.label_values.size())
                                ? ds.label_values[static_cast<std::size_t>(ex.label)]
                                : ex.label + 1;
    out << format_sparse_line(label, pairs) << '\n';
  }
}

Standardizer Standardizer::fit(const Dataset& ds) {
  if (ds.examples.empty()) throw std::invalid_argument("cannot fit standardizer on empty dataset");
  const std::size_t d = static_cast<std::size_t>(ds.n_features);
  const double n = static_cast<double>(ds.size());

  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (const Example& ex : ds.examples)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += ex.features[j];
  for (std::size_t j = 0; j < d; ++j) s.mean[j] /= n;

  std::vector<double> var(d, 0.0);
  for (const Example& ex : ds.examples)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = ex.features[j] - s.mean[j];
      var[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) {
    var[j] /= n;
    s.scale[j] = var[j] > 1e-18 ? 1.0 / std::sqrt(var[j]) : 0.0;
  }

  double max_norm_sq = 0.0;
  for (const Example& ex : ds.examples) {
    double nrm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double z = (ex.features[j] - s.mean[j]) * s.scale[j];
      nrm += z * z;
    }
    max_norm_sq = std::max(max_norm_sq, nrm);
  }
  s.norm_scale = max_norm_sq > 0.0 ? 1.0 / std::sqrt(max_norm_sq) : 1.0;
  return s;
}

Dataset Standardizer::apply(const Dataset& ds) const {
  Dataset out = ds;
  const std::size_t d = mean.size();
  for (Example& ex : out.examples) {
    for (std::size_t j = 0; j < d; ++j)
      ex.features[j] = (ex.features[j] - mean[j]) * scale[j] * norm_scale;
  }
  return out;
}

Dataset standardize_features(const Dataset& ds) { return Standardizer::fit(ds).apply(ds); }

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must be in (0,1)");
  const std::int64_t n = static_cast<std::int64_t>(ds.size());
  if (n < 2) throw std::invalid_argument("need at least 2 examples to split");

  std::int64_t n_test = std::llround(test_fraction * static_cast<double>(n));
  n_test = std::clamp<std::int64_t>(n_test, 1, n - 1);

  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);

  // Both parts keep the shuffled order, so streaming the train split
  // presents examples in seeded random order even for class-sorted files.
  std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + n_test);
  std::vector<std::size_t> train_idx(idx.begin() + n_test, idx.end());

  auto take = [&](const std::vector<std::size_t>& which, std::uint64_t tag, const char* suffix) {
    Dataset part;
    part.n_classes = ds.n_classes;
    part.n_features = ds.n_features;
    part.name = ds.name + suffix;
    part.label_values = ds.label_values;
    part.examples.reserve(which.size());
    for (std::size_t i : which) part.examples.push_back(ds.examples[i]);
    for (std::size_t i = 0; i < part.examples.size(); ++i) part.examples[i].uid = tag | i;
    return part;
  };
  return {take(train_idx, kTrainSplitTag, ":train"), take(test_idx, kTestSplitTag, ":test")};
}

}  // namespace bdef
