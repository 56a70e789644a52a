#include <catch_amalgamated.hpp>

#include <filesystem>

#include "support/synthetic.hpp"
#include "tmids/explain.hpp"
#include "tmids/model_io.hpp"

using namespace tmids;

namespace {

PipelineModel trained_model(std::uint64_t seed) {
  Rng rng(seed);
  FlowTable raw;
  raw.columns = {"a", "b", "c"};
  raw.class_names = {"Benign", "DoS", "Recon"};
  raw.scenario = "T";
  std::vector<double> row(3);
  for (int i = 0; i < 300; ++i) {
    const int c = static_cast<int>(rng.below(3));
    for (auto& v : row) v = rng.uniform() * 10 + 4.0 * c;
    raw.add_row(row, c);
  }
  PipelineModel m;
  m.scenario = "T";
  m.class_names = raw.class_names;
  m.standardizer = StandardizerStats::fit(raw);
  m.binner = QuantileBinner::fit(m.standardizer.apply(raw), 4);
  TsetlinParams p;
  p.num_classes = 3;
  p.clauses_per_class = 10;
  p.specificity = 3.0;
  p.seed = seed;
  m.tm = TsetlinModel(p, m.binner.literal_names());
  const auto data = m.pack(raw);
  fit(m.tm, data, 3, rng);
  m.epochs_trained = 3;
  m.firing_frequency = firing_frequency(m.tm, data);
  return m;
}

}  // namespace

TEST_CASE("serialization round-trips bit-exactly") {
  const auto m = trained_model(1);
  const auto bytes = m.serialize();
  const auto back = PipelineModel::deserialize(bytes);
  CHECK(back.serialize() == bytes);
  CHECK(back.tm == m.tm);
  CHECK(back.binner == m.binner);
  CHECK(back.standardizer == m.standardizer);
  CHECK(back.class_names == m.class_names);
  CHECK(back.firing_frequency == m.firing_frequency);
  CHECK(back.epochs_trained == 3);
  CHECK(trained_model(1).serialize() == bytes);
  CHECK(trained_model(2).serialize() != bytes);

  const auto path = (std::filesystem::temp_directory_path() / "tmids_model_io.tmm").string();
  m.save(path);
  CHECK(PipelineModel::load(path).serialize() == bytes);
  std::filesystem::remove(path);

  Rng rng(3);
  std::vector<double> row(3);
  for (int i = 0; i < 200; ++i) {
    for (auto& v : row) v = rng.uniform() * 20 - 2;
    const auto lits = pack_literals(m.binarize(row));
    REQUIRE(back.tm.class_votes(pack_literals(back.binarize(row))) == m.tm.class_votes(lits));
  }
}

TEST_CASE("damaged model files are rejected") {
  const auto bytes = trained_model(4).serialize();
  for (std::size_t cut : {std::size_t{0}, std::size_t{7}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1})
    CHECK_THROWS_AS(PipelineModel::deserialize(std::span(bytes).first(cut)), DataError);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto bad = bytes;
    bad[rng.below(bad.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    CHECK_THROWS_AS(PipelineModel::deserialize(bad), DataError);
  }
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(PipelineModel::deserialize(extra), DataError);
  CHECK_THROWS_AS(PipelineModel::load("/nonexistent/model.tmm"), DataError);
}

TEST_CASE("schema mismatch names both schemas") {
  const auto m = trained_model(6);
  FlowTable other;
  other.columns = {"a", "b"};
  other.class_names = m.class_names;
  other.scenario = "S9";
  CHECK_THROWS_WITH(m.pack(other), Catch::Matchers::ContainsSubstring("S9") &&
                                       Catch::Matchers::ContainsSubstring("T schema"));
}
