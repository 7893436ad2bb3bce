#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bdef {

// Split tags folded into example uids so expert draws stay distinct across
// the train/test partition.
inline constexpr std::uint64_t kTrainSplitTag = 1ull << 62;
inline constexpr std::uint64_t kTestSplitTag = 2ull << 62;

struct Example {
  std::vector<double> features;
  int label = 0;           // class index in [0, n_classes)
  std::uint64_t uid = 0;   // stable identity for seeded expert draws
};

struct Dataset {
  std::vector<Example> examples;
  int n_classes = 0;
  int n_features = 0;
  std::string name;
  std::vector<long long> label_values;  // original label per class index

  std::size_t size() const { return examples.size(); }
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse pair as written in the text format; indices are 1-based there.
struct SparsePair {
  int index = 0;
  double value = 0.0;
};

// Parses "<label> <i1>:<v1> <i2>:<v2> ..." with strictly increasing 1-based
// indices. Throws ParseError naming the offending column.
std::pair<long long, std::vector<SparsePair>> parse_sparse_line(std::string_view line);

std::string format_sparse_line(long long label, std::span<const SparsePair> pairs);

struct LoadOptions {
  int n_features = 0;        // 0 = infer from the maximum index seen
  std::int64_t max_rows = 0; // 0 = keep all rows; otherwise uniform subsample
  std::uint64_t seed = 0;    // subsample seed
};

// Loads a sparse text file; labels are remapped to contiguous indices
// preserving their sorted original order.
Dataset load_dataset(const std::string& path, const LoadOptions& opts = {});

void write_dataset(const Dataset& ds, const std::string& path);

// Per-coordinate affine transform fit on one dataset and applied to others.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;   // 1/std, 0 for constant coordinates
  double norm_scale = 1.0;     // 1/max Euclidean norm after standardization

  static Standardizer fit(const Dataset& ds);
  Dataset apply(const Dataset& ds) const;
};

// Zero mean, unit variance per coordinate, then scale so the maximum
// Euclidean norm is 1. Constant coordinates map to 0.
Dataset standardize_features(const Dataset& ds);

// Deterministic disjoint partition; both parts nonempty.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

}  // namespace bdef
