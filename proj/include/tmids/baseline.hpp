#pragma once

#include <vector>

#include "tmids/error.hpp"

namespace tmids {

// Always predicts the most frequent training class (lowest index on ties).
struct MajorityModel {
  int majority_class = 0;
  int num_classes = 0;

  static MajorityModel fit(const std::vector<int>& labels, int num_classes) {
    if (labels.empty()) throw UsageError("majority baseline needs at least one label");
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int l : labels) {
      if (l < 0 || l >= num_classes) throw DataError("label outside [0, num_classes)");
      ++counts[static_cast<std::size_t>(l)];
    }
    MajorityModel m;
    m.num_classes = num_classes;
    for (int c = 1; c < num_classes; ++c)
      if (counts[c] > counts[m.majority_class]) m.majority_class = c;
    return m;
  }

  template <typename Sample>
  int predict(const Sample&) const {
    return majority_class;
  }

  bool operator==(const MajorityModel&) const = default;
};

}  // namespace tmids
