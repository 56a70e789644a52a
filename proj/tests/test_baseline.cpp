#include <catch_amalgamated.hpp>

#include "tmids/baseline.hpp"
#include "tmids/rng.hpp"

using namespace tmids;

TEST_CASE("majority class with 70/30 labels") {
  std::vector<int> labels(100, 0);
  std::fill(labels.begin() + 70, labels.end(), 1);
  const auto m = MajorityModel::fit(labels, 2);
  CHECK(m.majority_class == 0);
  std::size_t hits = 0;
  for (int l : labels) hits += m.predict(l) == l;
  CHECK(static_cast<double>(hits) / labels.size() == 0.7);
}

TEST_CASE("ties go to the lowest class") {
  CHECK(MajorityModel::fit({0, 1, 1, 0}, 2).majority_class == 0);
  CHECK(MajorityModel::fit({2, 1, 2, 1}, 3).majority_class == 1);
  CHECK(MajorityModel::fit({3}, 5).majority_class == 3);
}

TEST_CASE("baseline accuracy equals majority prevalence on any evaluation set") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int C = 2 + static_cast<int>(rng.below(5));
    std::vector<int> train(1 + rng.below(200)), eval(1 + rng.below(200));
    for (auto& l : train) l = static_cast<int>(rng.below(C));
    for (auto& l : eval) l = static_cast<int>(rng.below(C));
    const auto m = MajorityModel::fit(train, C);
    REQUIRE(m.majority_class < C);
    std::size_t hits = 0, prevalence = 0;
    for (int l : eval) {
      hits += m.predict(l) == l;
      prevalence += l == m.majority_class;
    }
    REQUIRE(hits == prevalence);
  }
}

TEST_CASE("baseline input errors") {
  CHECK_THROWS_AS(MajorityModel::fit({}, 2), UsageError);
  CHECK_THROWS_AS(MajorityModel::fit({0, 2}, 2), DataError);
}
