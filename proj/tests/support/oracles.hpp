#pragma once

// Reference implementations used only by tests. Each one is written from the
// definition, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

namespace oracle {

// Conjunction over explicit literal index sets.
inline int conjunction(const std::vector<int>& bits, const std::set<int>& pos, const std::set<int>& neg,
                       bool learning) {
  if (pos.empty() && neg.empty()) return learning ? 1 : 0;
  for (int i : pos)
    if (bits[i] != 1) return 0;
  for (int k : neg)
    if (bits[k] != 0) return 0;
  return 1;
}

// Hyndman-Fan type 7 with 1-based order statistics:
//   h = (n - 1) p + 1,  Q = x_(floor h) + (h - floor h)(x_(floor h + 1) - x_(floor h)).
inline double type7_quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double h = (n - 1.0) * p + 1.0;
  const double fh = std::floor(h);
  const auto lo = static_cast<std::size_t>(fh);  // 1-based
  if (lo >= x.size()) return x.back();
  return x[lo - 1] + (h - fh) * (x[lo] - x[lo - 1]);
}

struct Quad {
  double tp, tn, fp, fn;
};

inline double accuracy(Quad q) { return (q.tp + q.tn) / (q.tp + q.tn + q.fp + q.fn); }
inline double precision(Quad q) { return q.tp + q.fp == 0 ? 0.0 : q.tp / (q.tp + q.fp); }
inline double recall(Quad q) { return q.tp + q.fn == 0 ? 0.0 : q.tp / (q.tp + q.fn); }
inline double f1(Quad q) {
  const double p = precision(q), r = recall(q);
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

// One-vs-rest counts of class c straight from label pairs.
inline Quad one_vs_rest(const std::vector<int>& truth, const std::vector<int>& pred, int c) {
  Quad q{0, 0, 0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == c, p = pred[i] == c;
    if (t && p) q.tp += 1;
    else if (!t && !p) q.tn += 1;
    else if (!t && p) q.fp += 1;
    else q.fn += 1;
  }
  return q;
}

}  // namespace oracle
