#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tmids/error.hpp"

namespace tmids {

// Numeric flow-feature matrix with named columns and integer class labels.
// Labels index into class_names. Before cleaning, values may be NaN.
struct FlowTable {
  std::vector<std::string> columns;
  std::vector<double> values;  // row-major
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::string scenario;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return columns.size(); }
  bool empty() const { return labels.empty(); }

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols(), cols()}; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  void add_row(std::span<const double> v, int label) {
    if (v.size() != cols())
      throw DimensionError("row has " + std::to_string(v.size()) + " values, table has " +
                           std::to_string(cols()) + " columns");
    values.insert(values.end(), v.begin(), v.end());
    labels.push_back(label);
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
  }

  // Same schema, no rows.
  FlowTable empty_like() const {
    FlowTable t;
    t.columns = columns;
    t.class_names = class_names;
    t.scenario = scenario;
    return t;
  }

  FlowTable select_rows(std::span<const std::size_t> idx) const {
    FlowTable t = empty_like();
    t.values.reserve(idx.size() * cols());
    t.labels.reserve(idx.size());
    for (auto r : idx) t.add_row(row(r), labels[r]);
    return t;
  }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
    return counts;
  }

  bool operator==(const FlowTable&) const = default;
};

}  // namespace tmids
