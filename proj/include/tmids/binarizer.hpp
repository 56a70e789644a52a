#pragma once

// Per-feature quantile binning with one-hot dense encoding.
//
// Interior edges of feature f are the k/n_bins quantiles (k = 1..n_bins-1) of
// the training column, using linear interpolation between order statistics.
// Repeated edges collapse, and a constant column has no edges at all (a single
// always-on bin). Bins are half-open: bin b covers [edge_{b-1}, edge_b), with
// the first bin open to -inf and the last to +inf.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmids/error.hpp"
#include "tmids/table.hpp"

namespace tmids {

// Linear-interpolation quantile of an ascending range, q in [0, 1].
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw UsageError("quantile of an empty column");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

class QuantileBinner {
 public:
  QuantileBinner() = default;
  QuantileBinner(std::vector<std::string> feature_names, std::vector<std::vector<double>> edges,
                 int n_bins)
      : names_(std::move(feature_names)), edges_(std::move(edges)), n_bins_(n_bins) {
    if (names_.size() != edges_.size())
      throw DataError("binner has " + std::to_string(names_.size()) + " names but " +
                      std::to_string(edges_.size()) + " edge lists");
    for (std::size_t f = 0; f < edges_.size(); ++f)
      for (std::size_t k = 1; k < edges_[f].size(); ++k)
        if (!(edges_[f][k - 1] < edges_[f][k]))
          throw DataError("bin edges of feature '" + names_[f] + "' are not strictly increasing");
    compute_offsets();
  }

  static QuantileBinner fit(const FlowTable& table, int n_bins) {
    if (n_bins < 2) throw UsageError("n_bins must be >= 2");
    if (table.empty()) throw UsageError("cannot fit a binner on an empty table");
    if (table.rows() < static_cast<std::size_t>(n_bins))
      throw UsageError("binner needs at least n_bins rows (" + std::to_string(n_bins) + ")");
    std::vector<std::vector<double>> edges(table.cols());
    for (std::size_t c = 0; c < table.cols(); ++c) {
      auto col = table.column(c);
      for (double v : col)
        if (!std::isfinite(v))
          throw DataError("non-finite value in column '" + table.columns[c] + "' while fitting binner");
      std::sort(col.begin(), col.end());
      if (col.front() == col.back()) continue;
      for (int k = 1; k < n_bins; ++k) {
        const double e = sorted_quantile(col, static_cast<double>(k) / n_bins);
        if (edges[c].empty() || e > edges[c].back()) edges[c].push_back(e);
      }
    }
    return QuantileBinner(table.columns, std::move(edges), n_bins);
  }

  int n_bins() const { return n_bins_; }
  std::size_t num_features() const { return names_.size(); }
  const std::vector<std::string>& feature_names() const { return names_; }
  const std::vector<std::vector<double>>& edges() const { return edges_; }
  int bins_for(std::size_t f) const { return static_cast<int>(edges_[f].size()) + 1; }
  std::size_t output_width() const { return offsets_.empty() ? 0 : offsets_.back(); }
  // First output bit of feature f.
  std::size_t offset(std::size_t f) const { return offsets_[f]; }

  int bin_index(std::size_t f, double v) const {
    if (std::isnan(v)) throw DataError("NaN in feature '" + names_[f] + "' cannot be binarized");
    const auto& e = edges_[f];
    return static_cast<int>(std::upper_bound(e.begin(), e.end(), v) - e.begin());
  }

  void transform_into(std::span<const double> row, std::span<std::uint8_t> out) const {
    if (row.size() != names_.size())
      throw DimensionError("row has " + std::to_string(row.size()) + " features, binner expects " +
                           std::to_string(names_.size()));
    if (out.size() != output_width()) throw DimensionError("binarized output buffer has wrong width");
    std::fill(out.begin(), out.end(), 0);
    for (std::size_t f = 0; f < row.size(); ++f) out[offsets_[f] + bin_index(f, row[f])] = 1;
  }

  std::vector<std::uint8_t> transform(std::span<const double> row) const {
    std::vector<std::uint8_t> out(output_width());
    transform_into(row, out);
    return out;
  }

  // "Rate#3" names bit 3 of feature Rate.
  std::vector<std::string> literal_names() const {
    std::vector<std::string> out;
    out.reserve(output_width());
    for (std::size_t f = 0; f < names_.size(); ++f)
      for (int b = 0; b < bins_for(f); ++b) out.push_back(names_[f] + "#" + std::to_string(b));
    return out;
  }

  // Feature and bin that produce output bit `bit`.
  std::pair<std::size_t, int> locate(std::size_t bit) const {
    if (bit >= output_width()) throw UsageError("bit index out of range");
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), bit);
    const auto f = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    return {f, static_cast<int>(bit - offsets_[f])};
  }

  // Interval covered by bin b of feature f.
  std::pair<double, double> interval(std::size_t f, int b) const {
    const auto& e = edges_[f];
    const double inf = std::numeric_limits<double>::infinity();
    const double lo = b == 0 ? -inf : e[b - 1];
    const double hi = b == static_cast<int>(e.size()) ? inf : e[b];
    return {lo, hi};
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "tmids-binner";
    j["version"] = 1;
    j["n_bins"] = n_bins_;
    j["features"] = nlohmann::json::array();
    for (std::size_t f = 0; f < names_.size(); ++f)
      j["features"].push_back({{"name", names_[f]}, {"edges", edges_[f]}});
    return j;
  }

  static QuantileBinner from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "tmids-binner") throw DataError("not a binner document");
    std::vector<std::string> names;
    std::vector<std::vector<double>> edges;
    for (const auto& f : j.at("features")) {
      names.push_back(f.at("name").get<std::string>());
      edges.push_back(f.at("edges").get<std::vector<double>>());
    }
    return QuantileBinner(std::move(names), std::move(edges), j.at("n_bins").get<int>());
  }

  bool operator==(const QuantileBinner& o) const {
    return names_ == o.names_ && edges_ == o.edges_ && n_bins_ == o.n_bins_;
  }

 private:
  void compute_offsets() {
    offsets_.assign(names_.size() + 1, 0);
    for (std::size_t f = 0; f < names_.size(); ++f) offsets_[f + 1] = offsets_[f] + bins_for(f);
  }

  std::vector<std::string> names_;
  std::vector<std::vector<double>> edges_;
  int n_bins_ = 0;
  std::vector<std::size_t> offsets_;
};

}  // namespace tmids
