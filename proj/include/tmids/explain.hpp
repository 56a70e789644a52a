#pragma once

// Vote vectors, clause activation maps and readable clause rules.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmids/binarizer.hpp"
#include "tmids/csv.hpp"
#include "tmids/preprocess.hpp"
#include "tmids/tsetlin.hpp"

namespace tmids {

inline std::vector<int> class_votes(const TsetlinModel& model, std::span<const std::uint64_t> literals) {
  return model.class_votes(literals);
}

struct ClauseActivationMap {
  int num_classes = 0;
  int clauses_per_class = 0;
  std::vector<std::uint8_t> active;  // num_classes x clauses_per_class
  std::vector<int> polarity;         // per clause column

  int at(int c, int j) const { return active[static_cast<std::size_t>(c) * clauses_per_class + j]; }

  int signed_row_sum(int c) const {
    int s = 0;
    for (int j = 0; j < clauses_per_class; ++j) s += polarity[j] * at(c, j);
    return s;
  }
};

inline ClauseActivationMap activation_map(const TsetlinModel& model, std::span<const std::uint64_t> literals) {
  ClauseActivationMap map;
  map.num_classes = model.num_classes();
  map.clauses_per_class = model.clauses_per_class();
  map.active.resize(model.num_clauses());
  for (int j = 0; j < map.clauses_per_class; ++j) map.polarity.push_back(model.polarity(j));
  for (int c = 0; c < map.num_classes; ++c)
    for (int j = 0; j < map.clauses_per_class; ++j)
      map.active[static_cast<std::size_t>(c) * map.clauses_per_class + j] =
          model.clause_output(c, j, literals, ClauseMode::inference);
  return map;
}

// Fraction of rows of `data` on which each clause fires (inference mode),
// clause-major like the model.
inline std::vector<double> firing_frequency(const TsetlinModel& model, const PackedDataset& data) {
  std::vector<double> freq(model.num_clauses(), 0.0);
  if (data.empty()) return freq;
  std::vector<std::uint64_t> hits(model.num_clauses(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto lits = data.literals(i);
    for (int c = 0; c < model.num_classes(); ++c)
      for (int j = 0; j < model.clauses_per_class(); ++j)
        hits[static_cast<std::size_t>(c) * model.clauses_per_class() + j] +=
            model.clause_output(c, j, lits, ClauseMode::inference);
  }
  for (std::size_t k = 0; k < freq.size(); ++k)
    freq[k] = static_cast<double>(hits[k]) / static_cast<double>(data.size());
  return freq;
}

// ---------------------------------------------------------------------------
// Rules

inline constexpr const char* kEmptyRule = "TRUE (unconstrained)";

struct RenderedRule {
  int class_id = 0;
  int clause = 0;
  int polarity = +1;
  double firing_frequency = 0.0;
  std::vector<int> positive;  // x_i included
  std::vector<int> negated;   // NOT x_k included
  std::string text;
  std::vector<std::string> intervals;  // one per literal, when a binner is available
  std::vector<std::string> warnings;
};

inline std::string rule_text(const std::vector<std::string>& names, const std::vector<int>& positive,
                             const std::vector<int>& negated) {
  if (positive.empty() && negated.empty()) return kEmptyRule;
  std::string out;
  auto append = [&](const std::string& lit) {
    if (!out.empty()) out += " AND ";
    out += lit;
  };
  for (int i : positive) append(names.at(static_cast<std::size_t>(i)));
  for (int k : negated) append("NOT " + names.at(static_cast<std::size_t>(k)));
  return out;
}

struct ParsedRule {
  std::vector<int> positive;
  std::vector<int> negated;
};

inline ParsedRule parse_rule(const std::string& text, const std::vector<std::string>& names) {
  ParsedRule r;
  if (text == kEmptyRule) return r;
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(" AND ", pos);
    if (end == std::string::npos) end = text.size();
    std::string lit = text.substr(pos, end - pos);
    bool neg = lit.rfind("NOT ", 0) == 0;
    if (neg) lit = lit.substr(4);
    const auto it = index.find(lit);
    if (it == index.end()) throw DataError("rule refers to unknown literal '" + lit + "'");
    (neg ? r.negated : r.positive).push_back(it->second);
    pos = end + 5;
  }
  std::sort(r.positive.begin(), r.positive.end());
  std::sort(r.negated.begin(), r.negated.end());
  return r;
}

namespace detail {

inline std::string fmt_edge(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

inline std::string interval_text(double lo, double hi) {
  return (std::isinf(lo) ? "(" : "[") + fmt_edge(lo) + ", " + fmt_edge(hi) + ")";
}

// "Rate ∈ bin 4 [0.53, inf) (raw [1200, inf))"
inline std::string describe_bit(const QuantileBinner& binner, const StandardizerStats* stats, std::size_t bit,
                                bool negated) {
  const auto [f, b] = binner.locate(bit);
  const auto [lo, hi] = binner.interval(f, b);
  std::string s = binner.feature_names()[f] + " ∈ bin " + std::to_string(b) + " " + interval_text(lo, hi);
  if (stats && f < stats->stddev.size() && stats->stddev[f] > 0.0) {
    const double rlo = std::isinf(lo) ? lo : stats->to_raw(f, lo);
    const double rhi = std::isinf(hi) ? hi : stats->to_raw(f, hi);
    s += " (raw " + interval_text(rlo, rhi) + ")";
  }
  return negated ? "NOT (" + s + ")" : s;
}

}  // namespace detail

// Positive-polarity clauses of `class_id`, most frequently firing first
// (`frequency` is clause-major, as from firing_frequency()). top_k is clamped
// to the number of positive clauses.
inline std::vector<RenderedRule> render_rules(const TsetlinModel& model, int class_id, int top_k,
                                              const std::vector<double>& frequency,
                                              const QuantileBinner* binner = nullptr,
                                              const StandardizerStats* stats = nullptr) {
  if (top_k < 1) throw UsageError("top_k must be >= 1");
  if (class_id < 0 || class_id >= model.num_classes()) throw UsageError("class index out of range");
  if (!frequency.empty() && frequency.size() != model.num_clauses())
    throw DimensionError("firing-frequency vector does not match the model's clause count");
  if (binner && binner->output_width() != static_cast<std::size_t>(model.num_features()))
    throw DimensionError("binner width does not match the model's input width");

  const int half = model.clauses_per_class() / 2;
  const std::size_t base = static_cast<std::size_t>(class_id) * model.clauses_per_class();
  auto freq = [&](int j) { return frequency.empty() ? 0.0 : frequency[base + j]; };
  std::vector<int> order(half);
  for (int j = 0; j < half; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return freq(a) > freq(b); });
  order.resize(std::min(half, top_k));

  std::vector<RenderedRule> rules;
  for (int j : order) {
    const Clause cl = model.clause(class_id, j);
    RenderedRule r;
    r.class_id = class_id;
    r.clause = j;
    r.polarity = cl.polarity;
    r.firing_frequency = freq(j);
    r.positive = cl.included_positive();
    r.negated = cl.included_negated();
    r.text = rule_text(model.feature_names(), r.positive, r.negated);
    if (r.positive.empty() && r.negated.empty())
      r.warnings.push_back("clause includes no literals and never votes at inference");
    if (binner) {
      for (int i : r.positive) r.intervals.push_back(detail::describe_bit(*binner, stats, i, false));
      for (int k : r.negated) r.intervals.push_back(detail::describe_bit(*binner, stats, k, true));
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

// ---------------------------------------------------------------------------
// Exports

inline void write_votes_csv(std::ostream& out, const std::vector<std::string>& class_names,
                            const std::vector<int>& votes) {
  csv::Writer w(out);
  w.row(std::vector<std::string>{"class", "vote"});
  for (std::size_t c = 0; c < votes.size(); ++c) w.row(std::vector<std::string>{class_names.at(c), std::to_string(votes[c])});
}

// One row per class, one column per clause; header carries polarity.
inline void write_activation_csv(std::ostream& out, const ClauseActivationMap& map,
                                 const std::vector<std::string>& class_names) {
  csv::Writer w(out);
  std::vector<std::string> header{"class"};
  for (int j = 0; j < map.clauses_per_class; ++j)
    header.push_back((map.polarity[j] > 0 ? "+" : "-") + std::to_string(j));
  w.row(header);
  for (int c = 0; c < map.num_classes; ++c) {
    std::vector<std::string> row{class_names.at(static_cast<std::size_t>(c))};
    for (int j = 0; j < map.clauses_per_class; ++j) row.push_back(std::to_string(map.at(c, j)));
    w.row(row);
  }
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Heatmap grid: yellow cells fired, dark purple cells silent.
inline void write_activation_svg(std::ostream& out, const ClauseActivationMap& map,
                                 const std::vector<std::string>& class_names) {
  constexpr int cell = 10, label_w = 90, top = 24;
  const int width = label_w + map.clauses_per_class * cell + 10;
  const int height = top + map.num_classes * cell * 2 + 10;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  const int half = map.clauses_per_class / 2;
  out << "<text x=\"" << label_w << "\" y=\"12\">positive clauses</text>\n";
  out << "<text x=\"" << label_w + half * cell << "\" y=\"12\">negative clauses</text>\n";
  for (int c = 0; c < map.num_classes; ++c) {
    const int y = top + c * cell * 2;
    out << "<text x=\"2\" y=\"" << y + cell - 1 << "\">" << xml_escape(class_names.at(static_cast<std::size_t>(c)))
        << " (" << map.signed_row_sum(c) << ")</text>\n";
    for (int j = 0; j < map.clauses_per_class; ++j)
      out << "<rect x=\"" << label_w + j * cell << "\" y=\"" << y << "\" width=\"" << cell - 1 << "\" height=\""
          << cell - 1 << "\" fill=\"" << (map.at(c, j) ? "#fde725" : "#440154") << "\"/>\n";
  }
  out << "</svg>\n";
}

inline nlohmann::json rules_json(const std::vector<RenderedRule>& rules, const std::vector<std::string>& class_names) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rules)
    arr.push_back({{"class", class_names.at(static_cast<std::size_t>(r.class_id))},
                   {"clause", r.clause},
                   {"polarity", r.polarity},
                   {"firing_frequency", r.firing_frequency},
                   {"positive_literals", r.positive},
                   {"negated_literals", r.negated},
                   {"text", r.text},
                   {"intervals", r.intervals},
                   {"warnings", r.warnings}});
  return arr;
}

inline void write_rules_text(std::ostream& out, const std::vector<RenderedRule>& rules,
                             const std::vector<std::string>& class_names) {
  for (const auto& r : rules) {
    out << class_names.at(static_cast<std::size_t>(r.class_id)) << " clause " << r.clause << " (+, fires "
        << std::fixed << std::setprecision(4) << r.firing_frequency << std::defaultfloat << "): " << r.text << "\n";
    for (const auto& i : r.intervals) out << "    " << i << "\n";
    for (const auto& w : r.warnings) out << "    warning: " << w << "\n";
  }
}

}  // namespace tmids
