#pragma once

// Multi-class Tsetlin Machine.
//
// Each class owns m clauses; the first m/2 vote for the class, the last m/2
// against it. A clause is a conjunction over 2d literals (x_0..x_{d-1} followed
// by their negations), and every literal is guarded by one Tsetlin automaton
// with 2N states: states 1..N exclude the literal, N+1..2N include it.
//
// Internally the automata of one clause are stored as bytes (state - 1) and
// mirrored by a bit-packed include mask, so clause evaluation is a handful of
// word-wide AND operations against a packed literal vector.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tmids/error.hpp"
#include "tmids/rng.hpp"

namespace tmids {

enum class ClauseMode { inference, learning };

struct BinarizedSample {
  std::vector<std::uint8_t> bits;
  int label = 0;
};

struct TsetlinAutomaton {
  int state = 1;  // [1, 2N]
  int states_per_action = 128;

  bool includes() const { return state > states_per_action; }
};

// Value form of one clause, detached from a model.
struct Clause {
  std::vector<TsetlinAutomaton> automata;  // 2d entries
  int polarity = +1;
  int class_id = 0;

  int num_features() const { return static_cast<int>(automata.size() / 2); }

  // Indices i with x_i included, and k with NOT x_k included.
  std::vector<int> included_positive() const {
    std::vector<int> out;
    for (int i = 0; i < num_features(); ++i)
      if (automata[i].includes()) out.push_back(i);
    return out;
  }
  std::vector<int> included_negated() const {
    std::vector<int> out;
    const int d = num_features();
    for (int i = 0; i < d; ++i)
      if (automata[d + i].includes()) out.push_back(i);
    return out;
  }
};

inline void validate_bits(std::span<const std::uint8_t> bits) {
  for (auto b : bits)
    if (b > 1) throw DataError("binarized sample contains a value other than 0/1");
}

inline bool evaluate_clause(const Clause& clause, std::span<const std::uint8_t> bits,
                            ClauseMode mode) {
  const std::size_t d = bits.size();
  if (clause.automata.size() != 2 * d)
    throw DimensionError("clause has " + std::to_string(clause.automata.size()) +
                         " automata but the sample implies " + std::to_string(2 * d));
  bool any_included = false;
  for (std::size_t i = 0; i < d; ++i) {
    if (clause.automata[i].includes()) {
      any_included = true;
      if (bits[i] == 0) return false;
    }
    if (clause.automata[d + i].includes()) {
      any_included = true;
      if (bits[i] != 0) return false;
    }
  }
  return any_included || mode == ClauseMode::learning;
}

inline bool evaluate_clause(const Clause& clause, const BinarizedSample& x, ClauseMode mode) {
  return evaluate_clause(clause, std::span<const std::uint8_t>(x.bits), mode);
}

// ---------------------------------------------------------------------------
// Packed literal vectors

inline std::size_t literal_words(int num_features) {
  return (2 * static_cast<std::size_t>(num_features) + 63) / 64;
}

// Writes x followed by NOT x into `out` (literal_words(d) words). Padding bits are 0.
inline void pack_literals(std::span<const std::uint8_t> bits, std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  const std::size_t d = bits.size();
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t k = bits[i] ? i : d + i;
    out[k >> 6] |= std::uint64_t{1} << (k & 63);
  }
}

inline std::vector<std::uint64_t> pack_literals(std::span<const std::uint8_t> bits) {
  std::vector<std::uint64_t> out(literal_words(static_cast<int>(bits.size())));
  validate_bits(bits);
  pack_literals(bits, out);
  return out;
}

// Row-major packed literal matrix plus labels.
class PackedDataset {
 public:
  PackedDataset() = default;
  explicit PackedDataset(int num_features)
      : num_features_(num_features), words_(literal_words(num_features)) {}

  void add(std::span<const std::uint8_t> bits, int label) {
    if (static_cast<int>(bits.size()) != num_features_)
      throw DimensionError("sample has " + std::to_string(bits.size()) + " bits, dataset expects " +
                           std::to_string(num_features_));
    validate_bits(bits);
    const std::size_t at = literals_.size();
    literals_.resize(at + words_);
    pack_literals(bits, std::span<std::uint64_t>(literals_.data() + at, words_));
    labels_.push_back(label);
  }
  void add(const BinarizedSample& s) { add(s.bits, s.label); }

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int num_features() const { return num_features_; }
  std::size_t words() const { return words_; }
  std::span<const std::uint64_t> literals(std::size_t row) const {
    return {literals_.data() + row * words_, words_};
  }
  int label(std::size_t row) const { return labels_[row]; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  int num_features_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> literals_;
  std::vector<int> labels_;
};

// ---------------------------------------------------------------------------

struct TsetlinParams {
  int num_classes = 2;
  int clauses_per_class = 100;  // m; half positive, half negative
  int threshold = 10;           // T
  double specificity = 2.0;     // s
  int states_per_action = 128;  // N
  std::uint64_t seed = 0;

  void validate() const {
    if (num_classes < 2) throw UsageError("num_classes must be >= 2");
    if (clauses_per_class < 2 || clauses_per_class % 2 != 0)
      throw UsageError("clauses per class must be a positive even number, got " +
                       std::to_string(clauses_per_class));
    if (threshold < 1) throw UsageError("threshold T must be >= 1");
    if (!(specificity > 1.0) || !std::isfinite(specificity))
      throw UsageError("specificity s must be > 1");
    if (states_per_action < 1 || states_per_action > 128)
      throw UsageError("states per action N must be in [1, 128]");
  }

  bool operator==(const TsetlinParams&) const = default;
};

class TsetlinModel {
 public:
  TsetlinModel() = default;

  // feature_names: one name per input bit (d entries).
  TsetlinModel(const TsetlinParams& params, std::vector<std::string> feature_names)
      : params_(params), feature_names_(std::move(feature_names)) {
    params_.validate();
    if (feature_names_.empty()) throw UsageError("model needs at least one input feature");
    d_ = static_cast<int>(feature_names_.size());
    words_ = literal_words(d_);
    const std::size_t clauses = num_clauses();
    states_.assign(clauses * num_literals(), static_cast<std::uint8_t>(params_.states_per_action - 1));
    include_.assign(clauses * words_, 0);
    include_count_.assign(clauses, 0);
  }

  const TsetlinParams& params() const { return params_; }
  int num_classes() const { return params_.num_classes; }
  int clauses_per_class() const { return params_.clauses_per_class; }
  int num_features() const { return d_; }
  int num_literals() const { return 2 * d_; }
  std::size_t words() const { return words_; }
  std::size_t num_clauses() const {
    return static_cast<std::size_t>(params_.num_classes) * params_.clauses_per_class;
  }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  int polarity(int j) const { return j < params_.clauses_per_class / 2 ? +1 : -1; }

  int state(int c, int j, int literal) const {
    return states_[clause_index(c, j) * num_literals() + literal] + 1;
  }

  void set_state(int c, int j, int literal, int state) {
    const int two_n = 2 * params_.states_per_action;
    if (state < 1 || state > two_n) throw UsageError("automaton state out of range");
    const std::size_t ci = clause_index(c, j);
    auto& raw = states_[ci * num_literals() + literal];
    const bool was = raw >= params_.states_per_action;
    raw = static_cast<std::uint8_t>(state - 1);
    const bool now = raw >= params_.states_per_action;
    if (was != now) toggle_include(ci, literal, now);
  }

  Clause clause(int c, int j) const {
    Clause out;
    out.polarity = polarity(j);
    out.class_id = c;
    out.automata.reserve(num_literals());
    for (int k = 0; k < num_literals(); ++k)
      out.automata.push_back({state(c, j, k), params_.states_per_action});
    return out;
  }

  std::size_t included_count(int c, int j) const { return include_count_[clause_index(c, j)]; }

  std::span<const std::uint64_t> include_mask(int c, int j) const {
    return {include_.data() + clause_index(c, j) * words_, words_};
  }

  // --- inference -----------------------------------------------------------

  bool clause_output(int c, int j, std::span<const std::uint64_t> literals,
                     ClauseMode mode) const {
    check_literals(literals);
    return fires(clause_index(c, j), literals.data(), mode);
  }

  int class_score(std::span<const std::uint64_t> literals, int c) const {
    check_literals(literals);
    if (c < 0 || c >= params_.num_classes) throw UsageError("class index out of range");
    return score(c, literals.data(), ClauseMode::inference);
  }

  std::vector<int> class_votes(std::span<const std::uint64_t> literals) const {
    check_literals(literals);
    std::vector<int> votes(params_.num_classes);
    for (int c = 0; c < params_.num_classes; ++c)
      votes[c] = score(c, literals.data(), ClauseMode::inference);
    return votes;
  }

  int predict(std::span<const std::uint64_t> literals) const {
    check_literals(literals);
    int best = 0;
    int best_score = score(0, literals.data(), ClauseMode::inference);
    for (int c = 1; c < params_.num_classes; ++c) {
      const int s = score(c, literals.data(), ClauseMode::inference);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    return best;
  }

  int predict(const BinarizedSample& x) const {
    check_bits(x.bits);
    return predict(pack_literals(x.bits));
  }
  int class_score(const BinarizedSample& x, int c) const {
    check_bits(x.bits);
    return class_score(pack_literals(x.bits), c);
  }

  // --- learning ------------------------------------------------------------

  void train_step(std::span<const std::uint64_t> literals, int label, Rng& rng) {
    check_literals(literals);
    if (label < 0 || label >= params_.num_classes)
      throw DataError("label " + std::to_string(label) + " outside [0, " +
                      std::to_string(params_.num_classes) + ")");
    auto other = static_cast<int>(rng.below(params_.num_classes - 1));
    if (other >= label) ++other;
    feedback(label, literals.data(), /*toward_positive=*/true, rng);
    feedback(other, literals.data(), /*toward_positive=*/false, rng);
  }

  void train_step(const BinarizedSample& x, Rng& rng) {
    check_bits(x.bits);
    train_step(pack_literals(x.bits), x.label, rng);
  }

  // Raw automaton storage (state - 1 per byte), clause-major.
  std::span<const std::uint8_t> raw_states() const { return states_; }

  // Rebuilds a model from raw states; used by deserialization.
  static TsetlinModel from_raw(const TsetlinParams& params, std::vector<std::string> feature_names,
                               std::span<const std::uint8_t> raw) {
    TsetlinModel m(params, std::move(feature_names));
    if (raw.size() != m.states_.size())
      throw DataError("automaton state block has the wrong size for the model shape");
    const int two_n = 2 * params.states_per_action;
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (raw[i] >= two_n) throw DataError("automaton state out of range in model data");
    std::copy(raw.begin(), raw.end(), m.states_.begin());
    m.rebuild_masks();
    return m;
  }

  bool operator==(const TsetlinModel& o) const {
    return params_ == o.params_ && feature_names_ == o.feature_names_ && states_ == o.states_;
  }

 private:
  std::size_t clause_index(int c, int j) const {
    return static_cast<std::size_t>(c) * params_.clauses_per_class + j;
  }

  void check_literals(std::span<const std::uint64_t> literals) const {
    if (literals.size() != words_)
      throw DimensionError("packed sample has " + std::to_string(literals.size()) +
                           " words, model expects " + std::to_string(words_));
  }
  void check_bits(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != d_)
      throw DimensionError("sample has " + std::to_string(bits.size()) + " bits, model expects " +
                           std::to_string(d_));
  }

  std::uint64_t last_word_mask() const {
    const int tail = (2 * d_) & 63;
    return tail == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << tail) - 1;
  }

  bool fires(std::size_t ci, const std::uint64_t* literals, ClauseMode mode) const {
    if (mode == ClauseMode::inference && include_count_[ci] == 0) return false;
    const std::uint64_t* inc = include_.data() + ci * words_;
    for (std::size_t w = 0; w < words_; ++w)
      if (inc[w] & ~literals[w]) return false;
    return true;
  }

  int score(int c, const std::uint64_t* literals, ClauseMode mode) const {
    const int m = params_.clauses_per_class;
    const int half = m / 2;
    const std::size_t base = clause_index(c, 0);
    int s = 0;
    for (int j = 0; j < half; ++j) s += fires(base + j, literals, mode);
    for (int j = half; j < m; ++j) s -= fires(base + j, literals, mode);
    return s;
  }

  void toggle_include(std::size_t ci, int literal, bool on) {
    auto& word = include_[ci * words_ + (literal >> 6)];
    const std::uint64_t bit = std::uint64_t{1} << (literal & 63);
    if (on) {
      word |= bit;
      ++include_count_[ci];
    } else {
      word &= ~bit;
      --include_count_[ci];
    }
  }

  void rebuild_masks() {
    std::fill(include_.begin(), include_.end(), 0);
    std::fill(include_count_.begin(), include_count_.end(), 0);
    const int lits = num_literals();
    for (std::size_t ci = 0; ci < num_clauses(); ++ci)
      for (int k = 0; k < lits; ++k)
        if (states_[ci * lits + k] >= params_.states_per_action) toggle_include(ci, k, true);
  }

  void increment(std::size_t ci, int literal) {
    auto& raw = states_[ci * num_literals() + literal];
    if (raw + 1 < 2 * params_.states_per_action) {
      ++raw;
      if (raw == params_.states_per_action) toggle_include(ci, literal, true);
    }
  }

  void decrement(std::size_t ci, int literal) {
    auto& raw = states_[ci * num_literals() + literal];
    if (raw > 0) {
      --raw;
      if (raw + 1 == params_.states_per_action) toggle_include(ci, literal, false);
    }
  }

  template <typename F>
  static void for_each_bit(std::uint64_t word, std::size_t w, F&& f) {
    while (word) {
      const int b = std::countr_zero(word);
      f(static_cast<int>(w * 64 + b));
      word &= word - 1;
    }
  }

  // Marks each literal independently with probability 1/s.
  void sample_low_probability_mask(Rng& rng) {
    scratch_.assign(words_, 0);
    const double log_q = std::log1p(-1.0 / params_.specificity);
    const auto lits = static_cast<std::uint64_t>(num_literals());
    std::uint64_t pos = rng.geometric_skip(log_q);
    while (pos < lits) {
      scratch_[pos >> 6] |= std::uint64_t{1} << (pos & 63);
      pos += 1 + rng.geometric_skip(log_q);
    }
  }

  // Type I: reinforce the sub-pattern. On a firing clause true literals move
  // toward inclusion with probability (s-1)/s and false literals toward
  // exclusion with probability 1/s; a silent clause forgets with probability 1/s.
  void type_i(std::size_t ci, const std::uint64_t* literals, bool fired, Rng& rng) {
    sample_low_probability_mask(rng);
    const std::uint64_t tail = last_word_mask();
    for (std::size_t w = 0; w < words_; ++w) {
      const std::uint64_t valid = (w + 1 == words_) ? tail : ~std::uint64_t{0};
      const std::uint64_t sel = scratch_[w];
      if (fired) {
        for_each_bit(literals[w] & ~sel & valid, w, [&](int k) { increment(ci, k); });
        for_each_bit(~literals[w] & sel & valid, w, [&](int k) { decrement(ci, k); });
      } else {
        for_each_bit(sel & valid, w, [&](int k) { decrement(ci, k); });
      }
    }
  }

  // Type II: on a firing clause, move excluded false literals one step toward
  // inclusion so the clause stops matching this input.
  void type_ii(std::size_t ci, const std::uint64_t* literals, bool fired) {
    if (!fired) return;
    const std::uint64_t tail = last_word_mask();
    const std::uint64_t* inc = include_.data() + ci * words_;
    for (std::size_t w = 0; w < words_; ++w) {
      const std::uint64_t valid = (w + 1 == words_) ? tail : ~std::uint64_t{0};
      for_each_bit(~literals[w] & ~inc[w] & valid, w, [&](int k) { increment(ci, k); });
    }
  }

  void feedback(int c, const std::uint64_t* literals, bool toward_positive, Rng& rng) {
    const int m = params_.clauses_per_class;
    const int t = params_.threshold;
    const std::size_t base = clause_index(c, 0);

    fired_.resize(m);
    for (int j = 0; j < m; ++j) fired_[j] = fires(base + j, literals, ClauseMode::learning);
    int votes = 0;
    for (int j = 0; j < m; ++j) votes += polarity(j) * fired_[j];
    votes = std::clamp(votes, -t, t);

    const double p = toward_positive ? (t - votes) / (2.0 * t) : (t + votes) / (2.0 * t);
    for (int j = 0; j < m; ++j) {
      if (!rng.bernoulli(p)) continue;
      const bool reinforce = (polarity(j) > 0) == toward_positive;
      if (reinforce)
        type_i(base + j, literals, fired_[j], rng);
      else
        type_ii(base + j, literals, fired_[j]);
    }
  }

  TsetlinParams params_;
  std::vector<std::string> feature_names_;
  int d_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint8_t> states_;
  std::vector<std::uint64_t> include_;
  std::vector<std::uint32_t> include_count_;

  // Training scratch; not part of the model's value.
  std::vector<std::uint64_t> scratch_;
  std::vector<std::uint8_t> fired_;
};

// ---------------------------------------------------------------------------

struct EpochRecord {
  int epoch = 0;
  double train_accuracy = 0.0;
  double test_accuracy = -1.0;  // negative when no held-out set was given
};

using TrainingTrace = std::vector<EpochRecord>;

inline double accuracy(const TsetlinModel& model, const PackedDataset& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    hits += model.predict(data.literals(i)) == data.label(i);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// Runs `epochs` shuffled passes over `train`. Accuracy is recorded after each
// epoch on the training set and, when non-null, on `holdout`.
inline TrainingTrace fit(TsetlinModel& model, const PackedDataset& train, int epochs, Rng& rng,
                         const PackedDataset* holdout = nullptr) {
  if (train.empty()) throw UsageError("cannot fit on an empty dataset");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (train.num_features() != model.num_features())
    throw DimensionError("dataset has " + std::to_string(train.num_features()) +
                         " features, model expects " + std::to_string(model.num_features()));
  TrainingTrace trace;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order.begin(), order.end());
    for (auto i : order) model.train_step(train.literals(i), train.label(i), rng);
    EpochRecord rec;
    rec.epoch = e + 1;
    rec.train_accuracy = accuracy(model, train);
    if (holdout) rec.test_accuracy = accuracy(model, *holdout);
    trace.push_back(rec);
  }
  return trace;
}

}  // namespace tmids
