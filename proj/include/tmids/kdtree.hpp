#pragma once

// Exact k-nearest-neighbour search under squared Euclidean distance.
// Ties are broken by point index, so results match a brute-force scan exactly.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace tmids {

using Neighbor = std::pair<double, std::size_t>;  // (squared distance, index)

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Linear scan over every other point.
inline std::vector<std::size_t> brute_force_knn(std::span<const double> points, std::size_t dims,
                                                std::size_t query, std::size_t k) {
  const std::size_t n = points.size() / dims;
  std::vector<Neighbor> all;
  all.reserve(n);
  const auto q = points.subspan(query * dims, dims);
  for (std::size_t i = 0; i < n; ++i)
    if (i != query) all.emplace_back(squared_distance(q, points.subspan(i * dims, dims)), i);
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = all[i].second;
  return out;
}

class KdTree {
 public:
  // `points` is row-major n x dims and must outlive the tree.
  KdTree(std::span<const double> points, std::size_t dims) : points_(points), dims_(dims) {
    const std::size_t n = dims == 0 ? 0 : points.size() / dims;
    index_.resize(n);
    std::iota(index_.begin(), index_.end(), std::size_t{0});
    if (n > 0) build(0, n);
  }

  // k nearest points to point `query` (itself excluded), nearest first.
  std::vector<std::size_t> knn(std::size_t query, std::size_t k) const {
    std::priority_queue<Neighbor> heap;  // max-heap on (distance, index)
    if (k > 0 && !nodes_.empty()) search(0, point(query), query, k, heap);
    std::vector<std::size_t> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in index_
    std::size_t split_dim = 0;
    double split = 0.0;
    int left = -1, right = -1;
  };

  static constexpr std::size_t kLeafSize = 16;

  std::span<const double> point(std::size_t i) const { return points_.subspan(i * dims_, dims_); }

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < dims_; ++d) {
      double lo = point(index_[begin])[d], hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        const double v = point(index_[i])[d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) return id;  // all points identical

    const std::size_t mid = begin + (end - begin) / 2;
    auto first = index_.begin() + static_cast<std::ptrdiff_t>(begin);
    std::nth_element(first, index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     index_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return point(a)[best_dim] < point(b)[best_dim]; });
    const double split = point(index_[mid])[best_dim];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].split_dim = best_dim;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void offer(std::priority_queue<Neighbor>& heap, std::size_t k, Neighbor cand) const {
    if (heap.size() < k) {
      heap.push(cand);
    } else if (cand < heap.top()) {
      heap.pop();
      heap.push(cand);
    }
  }

  void search(int id, std::span<const double> q, std::size_t self, std::size_t k,
              std::priority_queue<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t p = index_[i];
        if (p != self) offer(heap, k, {squared_distance(q, point(p)), p});
      }
      return;
    }
    // Left child holds values <= split, right child values >= split.
    const double diff = q[node.split_dim] - node.split;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    search(near, q, self, k, heap);
    if (heap.size() < k || diff * diff <= heap.top().first) search(far, q, self, k, heap);
  }

  std::span<const double> points_;
  std::size_t dims_;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace tmids
