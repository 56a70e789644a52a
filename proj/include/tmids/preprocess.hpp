#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tmids/error.hpp"
#include "tmids/kdtree.hpp"
#include "tmids/rng.hpp"
#include "tmids/table.hpp"

namespace tmids {

// ---------------------------------------------------------------------------
// Cleaning

struct CleanStats {
  std::size_t input_rows = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_duplicates = 0;
  std::size_t output_rows = 0;
};

struct CleanResult {
  FlowTable table;
  CleanStats stats;
};

namespace detail {

inline std::uint64_t hash_row(std::span<const double> row, int label) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(label);
  for (double v : row) {
    const auto bits = std::bit_cast<std::uint64_t>(v + 0.0);  // folds -0.0 into +0.0
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace detail

// Drops rows with any non-finite value, then exact duplicates of
// (features, label), keeping the first occurrence. Column order is preserved.
inline CleanResult clean(const FlowTable& raw) {
  CleanResult out;
  out.table = raw.empty_like();
  out.stats.input_rows = raw.rows();
  std::unordered_multimap<std::uint64_t, std::size_t> seen;  // hash -> output row
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const auto row = raw.row(r);
    if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) {
      ++out.stats.dropped_missing;
      continue;
    }
    const auto h = detail::hash_row(row, raw.labels[r]);
    bool duplicate = false;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi && !duplicate; ++it) {
      const auto prev = out.table.row(it->second);
      duplicate = out.table.labels[it->second] == raw.labels[r] &&
                  std::equal(prev.begin(), prev.end(), row.begin());
    }
    if (duplicate) {
      ++out.stats.dropped_duplicates;
      continue;
    }
    seen.emplace(h, out.table.rows());
    out.table.add_row(row, raw.labels[r]);
  }
  out.stats.output_rows = out.table.rows();
  if (out.table.empty() && raw.rows() > 0)
    throw UsageError("cleaning removed every row of the " + raw.scenario + " table");
  return out;
}

// ---------------------------------------------------------------------------
// Standardization (population standard deviation)

struct StandardizerStats {
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> stddev;

  static StandardizerStats fit(const FlowTable& train) {
    if (train.empty()) throw UsageError("cannot fit a standardizer on an empty table");
    StandardizerStats s;
    s.columns = train.columns;
    s.mean.assign(train.cols(), 0.0);
    s.stddev.assign(train.cols(), 0.0);
    const auto n = static_cast<double>(train.rows());
    for (std::size_t c = 0; c < train.cols(); ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < train.rows(); ++r) sum += train.at(r, c);
      const double mean = sum / n;
      double ss = 0.0;
      for (std::size_t r = 0; r < train.rows(); ++r) {
        const double d = train.at(r, c) - mean;
        ss += d * d;
      }
      s.mean[c] = mean;
      s.stddev[c] = std::sqrt(ss / n);
    }
    return s;
  }

  void apply_row(std::span<const double> in, std::span<double> out) const {
    if (in.size() != mean.size() || out.size() != mean.size())
      throw DimensionError("standardizer expects " + std::to_string(mean.size()) + " columns");
    for (std::size_t c = 0; c < in.size(); ++c)
      out[c] = stddev[c] > 0.0 ? (in[c] - mean[c]) / stddev[c] : 0.0;
  }

  FlowTable apply(const FlowTable& t) const {
    check_columns(t);
    FlowTable out = t;
    for (std::size_t r = 0; r < t.rows(); ++r) apply_row(t.row(r), out.row(r));
    return out;
  }

  // Constant columns come back as their training mean.
  FlowTable inverse(const FlowTable& t) const {
    check_columns(t);
    FlowTable out = t;
    for (std::size_t r = 0; r < t.rows(); ++r)
      for (std::size_t c = 0; c < t.cols(); ++c)
        out.row(r)[c] = t.at(r, c) * stddev[c] + mean[c];
    return out;
  }

  double to_raw(std::size_t c, double z) const { return z * stddev[c] + mean[c]; }

  nlohmann::json to_json() const {
    return {{"format", "tmids-standardizer"}, {"version", 1},
            {"columns", columns},             {"mean", mean},
            {"stddev", stddev}};
  }

  static StandardizerStats from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "tmids-standardizer") throw DataError("not a standardizer document");
    StandardizerStats s;
    s.columns = j.at("columns").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    if (s.mean.size() != s.columns.size() || s.stddev.size() != s.columns.size())
      throw DataError("standardizer document has inconsistent lengths");
    return s;
  }

  bool operator==(const StandardizerStats&) const = default;

 private:
  void check_columns(const FlowTable& t) const {
    if (t.columns != columns)
      throw DimensionError("table columns do not match the standardizer's training columns");
  }
};

// ---------------------------------------------------------------------------
// SMOTE

struct SmoteResult {
  FlowTable table;                     // originals first, synthetic rows appended
  std::vector<std::size_t> synthetic;  // per class
  std::vector<std::string> warnings;
};

// Oversamples every class up to the majority count. Each synthetic row is
// p + u (q - p) with p a random member of the class, q one of p's k nearest
// same-class neighbours (Euclidean) and u uniform in [0, 1).
inline SmoteResult smote(const FlowTable& train, int k_neighbors, Rng& rng) {
  if (k_neighbors < 1) throw UsageError("SMOTE k_neighbors must be >= 1");
  if (train.empty()) throw UsageError("SMOTE on an empty table");
  const std::size_t dims = train.cols();
  const auto counts = train.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] < 2)
      throw DataError("SMOTE needs at least 2 samples of class '" + train.class_names[c] +
                      "', found " + std::to_string(counts[c]));
  const std::size_t target = *std::max_element(counts.begin(), counts.end());

  SmoteResult out;
  out.table = train;
  out.synthetic.assign(counts.size(), 0);

  for (std::size_t c = 0; c < counts.size(); ++c) {
    const std::size_t need = target - counts[c];
    if (need == 0) continue;

    std::vector<double> points;
    points.reserve(counts[c] * dims);
    for (std::size_t r = 0; r < train.rows(); ++r)
      if (train.labels[r] == static_cast<int>(c)) {
        const auto row = train.row(r);
        points.insert(points.end(), row.begin(), row.end());
      }
    const std::size_t n = counts[c];
    std::size_t k = static_cast<std::size_t>(k_neighbors);
    if (k > n - 1) {
      out.warnings.push_back("class '" + train.class_names[c] + "' has " + std::to_string(n) +
                             " samples; SMOTE k clipped from " + std::to_string(k) + " to " +
                             std::to_string(n - 1));
      k = n - 1;
    }

    KdTree tree(points, dims);
    std::unordered_map<std::size_t, std::vector<std::size_t>> neighbours;
    std::vector<double> synth(dims);
    for (std::size_t g = 0; g < need; ++g) {
      const std::size_t p = rng.below(n);
      auto it = neighbours.find(p);
      if (it == neighbours.end()) it = neighbours.emplace(p, tree.knn(p, k)).first;
      const std::size_t q = it->second[rng.below(it->second.size())];
      const double u = rng.uniform();
      const double* a = points.data() + p * dims;
      const double* b = points.data() + q * dims;
      for (std::size_t d = 0; d < dims; ++d)
        synth[d] = std::clamp(a[d] + u * (b[d] - a[d]), std::min(a[d], b[d]), std::max(a[d], b[d]));
      out.table.add_row(synth, static_cast<int>(c));
    }
    out.synthetic[c] = need;
  }
  return out;
}

}  // namespace tmids
