#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmids/csv.hpp"
#include "tmids/error.hpp"
#include "tmids/rng.hpp"
#include "tmids/table.hpp"

namespace tmids {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes)
      : n_(num_classes), counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {}

  static ConfusionMatrix from_predictions(int num_classes, const std::vector<int>& truth,
                                          const std::vector<int>& predicted) {
    if (truth.size() != predicted.size())
      throw DimensionError("truth and prediction vectors differ in length");
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
  }

  void add(int truth, int predicted, std::uint64_t count = 1) {
    if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_)
      throw UsageError("class index outside the confusion matrix");
    counts_[static_cast<std::size_t>(truth) * n_ + predicted] += count;
  }

  int num_classes() const { return n_; }
  std::uint64_t at(int truth, int predicted) const {
    return counts_[static_cast<std::size_t>(truth) * n_ + predicted];
  }
  std::uint64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }
  std::uint64_t row_sum(int truth) const {
    std::uint64_t s = 0;
    for (int p = 0; p < n_; ++p) s += at(truth, p);
    return s;
  }
  std::uint64_t col_sum(int predicted) const {
    std::uint64_t s = 0;
    for (int t = 0; t < n_; ++t) s += at(t, predicted);
    return s;
  }
  std::uint64_t trace() const {
    std::uint64_t s = 0;
    for (int c = 0; c < n_; ++c) s += at(c, c);
    return s;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    if (o.n_ != n_) throw DimensionError("confusion matrices of different sizes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> counts_;
};

enum class Averaging { macro, weighted };

inline std::string to_string(Averaging a) { return a == Averaging::macro ? "macro" : "weighted"; }
inline Averaging parse_averaging(const std::string& s) {
  if (s == "macro") return Averaging::macro;
  if (s == "weighted") return Averaging::weighted;
  throw UsageError("averaging must be 'macro' or 'weighted', got '" + s + "'");
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::string> warnings;
};

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// Two classes: precision/recall/F1 of class 1 (the attack class) from
// TP/FP/FN directly. More classes: one-vs-rest per class, then averaged.
inline Metrics compute_metrics(const ConfusionMatrix& cm, Averaging averaging = Averaging::macro) {
  const auto total = cm.total();
  if (total == 0) throw UsageError("cannot compute metrics from an empty confusion matrix");
  const int n = cm.num_classes();
  Metrics m;
  m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  m.per_class.resize(n);
  for (int c = 0; c < n; ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto fp = static_cast<double>(cm.col_sum(c)) - tp;
    const auto fn = static_cast<double>(cm.row_sum(c)) - tp;
    auto& pc = m.per_class[c];
    pc.support = cm.row_sum(c);
    if (tp + fp > 0.0) {
      pc.precision = tp / (tp + fp);
    } else {
      m.warnings.push_back("precision of class " + std::to_string(c) + " is undefined (no predictions); set to 0");
    }
    if (tp + fn > 0.0) {
      pc.recall = tp / (tp + fn);
    } else {
      m.warnings.push_back("recall of class " + std::to_string(c) + " is undefined (no samples); set to 0");
    }
    pc.f1 = f1_score(pc.precision, pc.recall);
  }
  if (n == 2) {
    m.precision = m.per_class[1].precision;
    m.recall = m.per_class[1].recall;
    m.f1 = m.per_class[1].f1;
    return m;
  }
  for (int c = 0; c < n; ++c) {
    const double w = averaging == Averaging::macro
                         ? 1.0 / n
                         : static_cast<double>(m.per_class[c].support) / static_cast<double>(total);
    m.precision += w * m.per_class[c].precision;
    m.recall += w * m.per_class[c].recall;
    m.f1 += w * m.per_class[c].f1;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Latency

struct LatencyStats {
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p99_us = 0.0;
  std::size_t samples = 0;
  std::string cpu;
};

inline std::string cpu_description() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) return std::string(csv::trim(std::string_view(line).substr(colon + 1)));
    }
  return "unknown";
}

// Times `predict_one(i)` once per call, for i cycling over [0, n_inputs),
// `repetitions` passes after one untimed warmup pass.
template <typename Predict>
LatencyStats measure_latency(Predict&& predict_one, std::size_t n_inputs, int repetitions) {
  if (n_inputs == 0 || repetitions < 1) throw UsageError("latency needs inputs and repetitions >= 1");
  const std::size_t timed = n_inputs * static_cast<std::size_t>(repetitions);
  if (timed < 100) throw UsageError("latency measurement needs at least 100 timed predictions");
  volatile int sink = 0;
  for (std::size_t i = 0; i < n_inputs; ++i) sink = sink + predict_one(i);

  using clock = std::chrono::steady_clock;
  std::vector<double> us;
  us.reserve(timed);
  for (int r = 0; r < repetitions; ++r)
    for (std::size_t i = 0; i < n_inputs; ++i) {
      const auto t0 = clock::now();
      sink = sink + predict_one(i);
      const auto t1 = clock::now();
      us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
  LatencyStats s;
  s.samples = us.size();
  s.mean_us = std::accumulate(us.begin(), us.end(), 0.0) / static_cast<double>(us.size());
  std::sort(us.begin(), us.end());
  auto pct = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(us.size()))) - 1;
    return us[std::min(idx, us.size() - 1)];
  };
  s.p50_us = pct(0.50);
  s.p99_us = pct(0.99);
  s.cpu = cpu_description();
  return s;
}

// ---------------------------------------------------------------------------
// Cross-validation

// Assigns each row to one of k folds, class by class, continuing the rotation
// across classes so fold sizes differ by at most one.
inline std::vector<int> stratified_folds(const std::vector<int>& labels,
                                         const std::vector<std::string>& class_names, int k, Rng& rng) {
  if (k < 2) throw UsageError("cross-validation needs k >= 2");
  std::vector<std::vector<std::size_t>> by_class(class_names.size());
  for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(static_cast<std::size_t>(labels[i])).push_back(i);
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k))
      throw DataError("class '" + class_names[c] + "' has " + std::to_string(by_class[c].size()) +
                      " samples, fewer than k=" + std::to_string(k) + " folds");
  std::vector<int> fold(labels.size(), -1);
  std::size_t next = 0;
  for (auto& rows : by_class) {
    rng.shuffle(rows.begin(), rows.end());
    for (auto r : rows) fold[r] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  }
  return fold;
}

struct FoldResult {
  int fold = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(v.size()));
  return r;
}

struct EvalReport {
  std::string model = "tm";
  std::string scenario;
  std::vector<std::string> class_names;
  Averaging averaging = Averaging::macro;
  ConfusionMatrix confusion;
  Metrics metrics;
  std::vector<FoldResult> folds;
  std::optional<LatencyStats> latency;

  nlohmann::json to_json() const;
};

inline nlohmann::json metrics_json(const Metrics& m, const std::vector<std::string>& names) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t c = 0; c < m.per_class.size(); ++c)
    per.push_back({{"class", c < names.size() ? names[c] : std::to_string(c)},
                   {"precision", m.per_class[c].precision},
                   {"recall", m.per_class[c].recall},
                   {"f1", m.per_class[c].f1},
                   {"support", m.per_class[c].support}});
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},             {"per_class", per},         {"warnings", m.warnings}};
}

inline nlohmann::json confusion_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < cm.num_classes(); ++t) {
    nlohmann::json r = nlohmann::json::array();
    for (int p = 0; p < cm.num_classes(); ++p) r.push_back(cm.at(t, p));
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"model", model},
                      {"scenario", scenario},
                      {"classes", class_names},
                      {"averaging", to_string(averaging)},
                      {"samples", confusion.total()},
                      {"metrics", metrics_json(metrics, class_names)},
                      {"confusion_matrix", confusion_json(confusion)}};
  if (!folds.empty()) {
    nlohmann::json fj = nlohmann::json::array();
    std::vector<double> acc, pre, rec, f1;
    for (const auto& f : folds) {
      fj.push_back({{"fold", f.fold},
                    {"train_rows", f.train_rows},
                    {"test_rows", f.test_rows},
                    {"metrics", metrics_json(f.metrics, class_names)},
                    {"confusion_matrix", confusion_json(f.confusion)}});
      acc.push_back(f.metrics.accuracy);
      pre.push_back(f.metrics.precision);
      rec.push_back(f.metrics.recall);
      f1.push_back(f.metrics.f1);
    }
    j["folds"] = fj;
    auto ms = [](const MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
    j["fold_summary"] = {{"accuracy", ms(mean_std(acc))},
                         {"precision", ms(mean_std(pre))},
                         {"recall", ms(mean_std(rec))},
                         {"f1", ms(mean_std(f1))}};
  }
  if (latency)
    j["latency_us"] = {{"mean", latency->mean_us}, {"p50", latency->p50_us},
                       {"p99", latency->p99_us},   {"samples", latency->samples},
                       {"cpu", latency->cpu}};
  return j;
}

// Stratified k-fold evaluation. For each fold, `fit_predict(train, test, rng)`
// receives the other k-1 folds as `train` and must return one prediction per
// row of `test`; all fitting happens inside it, so nothing leaks from the
// held-out fold. The pooled confusion matrix sums the folds.
template <typename FitPredict>
EvalReport kfold_cv(const FlowTable& data, int k, FitPredict&& fit_predict, Rng& rng,
                    Averaging averaging = Averaging::macro) {
  if (data.empty()) throw UsageError("cross-validation on an empty table");
  const auto fold = stratified_folds(data.labels, data.class_names, k, rng);
  const int n_classes = static_cast<int>(data.class_names.size());
  EvalReport report;
  report.scenario = data.scenario;
  report.class_names = data.class_names;
  report.averaging = averaging;
  report.confusion = ConfusionMatrix(n_classes);
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
    const FlowTable train = data.select_rows(train_idx);
    const FlowTable test = data.select_rows(test_idx);
    Rng fold_rng(rng());
    const std::vector<int> predicted = fit_predict(train, test, fold_rng);
    FoldResult r;
    r.fold = f;
    r.train_rows = train.rows();
    r.test_rows = test.rows();
    r.confusion = ConfusionMatrix::from_predictions(n_classes, test.labels, predicted);
    r.metrics = compute_metrics(r.confusion, averaging);
    report.confusion += r.confusion;
    report.folds.push_back(std::move(r));
  }
  report.metrics = compute_metrics(report.confusion, averaging);
  return report;
}

}  // namespace tmids
