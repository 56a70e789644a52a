#include <catch_amalgamated.hpp>

#include <set>

#include "support/oracles.hpp"
#include "tmids/metrics.hpp"
#include "tmids/tsetlin.hpp"

using namespace tmids;
using Catch::Matchers::WithinAbs;

namespace {

ConfusionMatrix binary(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
  ConfusionMatrix cm(2);
  cm.add(1, 1, tp);
  cm.add(0, 0, tn);
  cm.add(0, 1, fp);
  cm.add(1, 0, fn);
  return cm;
}

std::pair<std::vector<int>, std::vector<int>> random_predictions(Rng& rng, int classes, std::size_t n) {
  std::vector<int> t(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<int>(rng.below(classes));
    p[i] = rng.uniform() < 0.6 ? t[i] : static_cast<int>(rng.below(classes));
  }
  return {t, p};
}

}  // namespace

TEST_CASE("binary metrics by hand") {
  const auto m = compute_metrics(binary(9, 90, 1, 0));
  CHECK_THAT(m.accuracy, WithinAbs(0.99, 1e-15));
  CHECK_THAT(m.precision, WithinAbs(0.9, 1e-15));
  CHECK_THAT(m.recall, WithinAbs(1.0, 1e-15));
  CHECK_THAT(m.f1, WithinAbs(18.0 / 19.0, 1e-15));
  CHECK_THAT(m.f1, WithinAbs(0.9474, 1e-4));
}

TEST_CASE("perfect and one-class predictors") {
  ConfusionMatrix perfect(4);
  for (int c = 0; c < 4; ++c) perfect.add(c, c, 10 + c);
  for (auto avg : {Averaging::macro, Averaging::weighted}) {
    const auto m = compute_metrics(perfect, avg);
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  const auto one = compute_metrics(binary(0, 50, 0, 50));  // always predicts class 0
  CHECK(one.accuracy == 0.5);
  CHECK(one.per_class[1].recall == 0.0);
  CHECK(one.per_class[0].recall == 1.0);
  CHECK(one.f1 == 0.0);
  CHECK_FALSE(one.warnings.empty());
  CHECK_THROWS_AS(compute_metrics(ConfusionMatrix(2)), UsageError);
}

TEST_CASE("metrics agree with the per-sample oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int C = 2 + static_cast<int>(rng.below(6));
    const auto [t, p] = random_predictions(rng, C, 1 + rng.below(500));
    const auto cm = ConfusionMatrix::from_predictions(C, t, p);
    REQUIRE(cm.total() == t.size());
    for (int c = 0; c < C; ++c)
      REQUIRE(cm.row_sum(c) == static_cast<std::uint64_t>(std::count(t.begin(), t.end(), c)));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < t.size(); ++i) hits += t[i] == p[i];

    for (auto avg : {Averaging::macro, Averaging::weighted}) {
      const auto m = compute_metrics(cm, avg);
      REQUIRE_THAT(m.accuracy, WithinAbs(static_cast<double>(hits) / t.size(), 1e-12));
      double P = 0, R = 0, F = 0;
      for (int c = 0; c < C; ++c) {
        const auto q = oracle::one_vs_rest(t, p, c);
        const double w = avg == Averaging::macro ? 1.0 / C : (q.tp + q.fn) / static_cast<double>(t.size());
        P += w * oracle::precision(q);
        R += w * oracle::recall(q);
        F += w * oracle::f1(q);
      }
      if (C == 2) {
        const auto q = oracle::one_vs_rest(t, p, 1);
        P = oracle::precision(q), R = oracle::recall(q), F = oracle::f1(q);
      }
      REQUIRE_THAT(m.precision, WithinAbs(P, 1e-12));
      REQUIRE_THAT(m.recall, WithinAbs(R, 1e-12));
      REQUIRE_THAT(m.f1, WithinAbs(F, 1e-12));
      for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
      }
    }
  }
}

TEST_CASE("macro F1 is invariant under class relabelling") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int C = 3 + static_cast<int>(rng.below(4));
    auto [t, p] = random_predictions(rng, C, 400);
    std::vector<int> perm(C);
    for (int c = 0; c < C; ++c) perm[c] = c;
    rng.shuffle(perm.begin(), perm.end());
    std::vector<int> t2(t.size()), p2(p.size());
    for (std::size_t i = 0; i < t.size(); ++i) t2[i] = perm[t[i]], p2[i] = perm[p[i]];
    const auto a = compute_metrics(ConfusionMatrix::from_predictions(C, t, p));
    const auto b = compute_metrics(ConfusionMatrix::from_predictions(C, t2, p2));
    REQUIRE_THAT(a.f1, WithinAbs(b.f1, 1e-12));
    REQUIRE_THAT(a.accuracy, WithinAbs(b.accuracy, 1e-12));
  }
}

TEST_CASE("stratified folds partition the data") {
  std::vector<int> labels(100);
  for (int i = 0; i < 100; ++i) labels[i] = i < 50 ? 0 : 1;
  Rng a(1), b(1);
  const auto fa = stratified_folds(labels, {"A", "B"}, 5, a);
  const auto fb = stratified_folds(labels, {"A", "B"}, 5, b);
  CHECK(fa == fb);
  std::vector<int> size(5, 0), per_class(10, 0);
  for (std::size_t i = 0; i < fa.size(); ++i) {
    REQUIRE(fa[i] >= 0);
    REQUIRE(fa[i] < 5);
    ++size[fa[i]];
    ++per_class[fa[i] * 2 + labels[i]];
  }
  CHECK(size == std::vector<int>(5, 20));
  CHECK(per_class == std::vector<int>(10, 10));

  std::vector<int> uneven(37);
  for (int i = 0; i < 37; ++i) uneven[i] = i % 3;
  Rng c(2);
  const auto fu = stratified_folds(uneven, {"a", "b", "c"}, 5, c);
  std::vector<int> us(5, 0);
  for (int f : fu) ++us[f];
  CHECK(*std::max_element(us.begin(), us.end()) - *std::min_element(us.begin(), us.end()) <= 1);

  std::vector<int> small{0, 0, 0, 0, 0, 0, 1, 1, 1};
  Rng d(3);
  CHECK_THROWS_WITH(stratified_folds(small, {"Benign", "Tiny"}, 5, d), Catch::Matchers::ContainsSubstring("Tiny"));
}

TEST_CASE("cross-validation never shows a fold its own rows during fitting") {
  FlowTable t;
  t.columns = {"id", "v"};
  t.class_names = {"A", "B"};
  for (int i = 0; i < 60; ++i) t.add_row(std::vector<double>{static_cast<double>(i), i % 7 * 1.0}, i % 3 == 0);
  // Sentinel: the same feature vector twice under one label.
  t.add_row(std::vector<double>{1000, 0}, 0);
  t.add_row(std::vector<double>{1000, 0}, 0);

  Rng rng(5);
  std::size_t seen_test = 0;
  const auto report = kfold_cv(
      t, 5,
      [&](const FlowTable& train, const FlowTable& test, Rng&) {
        std::set<double> train_ids;
        for (std::size_t r = 0; r < train.rows(); ++r) train_ids.insert(train.at(r, 0));
        for (std::size_t r = 0; r < test.rows(); ++r) {
          const double id = test.at(r, 0);
          if (id != 1000) REQUIRE_FALSE(train_ids.count(id));
        }
        seen_test += test.rows();
        return std::vector<int>(test.labels.begin(), test.labels.end());
      },
      rng);
  CHECK(seen_test == t.rows());
  CHECK(report.folds.size() == 5);
  CHECK(report.metrics.accuracy == 1.0);
  CHECK(report.confusion.total() == t.rows());
  const auto j = report.to_json();
  CHECK(j.contains("fold_summary"));
  CHECK(j["fold_summary"]["accuracy"]["mean"] == 1.0);
}

TEST_CASE("mean and population std of fold metrics") {
  const auto ms = mean_std({0.9, 0.95, 1.0});
  CHECK_THAT(ms.mean, WithinAbs(0.95, 1e-12));
  CHECK_THAT(ms.std, WithinAbs(std::sqrt(0.005 / 3.0), 1e-12));
}

TEST_CASE("latency grows with clause count") {
  const int d = 135 / 2 + 1;
  std::vector<std::string> names(d, "b");
  Rng rng(1);
  auto build = [&](int m) {
    TsetlinParams p;
    p.clauses_per_class = m;
    TsetlinModel model(p, names);
    for (int c = 0; c < 2; ++c)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < 4; ++k) model.set_state(c, j, static_cast<int>(rng.below(2 * d)), 129);
    return model;
  };
  const auto small = build(100), large = build(1000);
  PackedDataset data(d);
  std::vector<std::uint8_t> bits(d);
  for (int i = 0; i < 200; ++i) {
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(2));
    data.add(bits, 0);
  }
  auto time = [&](const TsetlinModel& m) {
    return measure_latency([&](std::size_t i) { return m.predict(data.literals(i)); }, data.size(), 10);
  };
  const auto ls = time(small), ll = time(large);
  CHECK(ls.samples == 2000);
  CHECK(ls.p50_us <= ls.p99_us);
  CHECK(ls.mean_us < ll.mean_us);
  CHECK_FALSE(ls.cpu.empty());
  CHECK_THROWS_AS(measure_latency([](std::size_t) { return 0; }, 10, 5), UsageError);
}
