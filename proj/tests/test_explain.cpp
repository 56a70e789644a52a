#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "tmids/explain.hpp"

using namespace tmids;

namespace {

std::vector<std::string> names(int d) {
  std::vector<std::string> v;
  for (int i = 0; i < d; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

TsetlinModel random_model(Rng& rng, int C, int m, int d, double p_include) {
  TsetlinParams p;
  p.num_classes = C;
  p.clauses_per_class = m;
  TsetlinModel model(p, names(d));
  for (int c = 0; c < C; ++c)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < 2 * d; ++k)
        if (rng.uniform() < p_include) model.set_state(c, j, k, 129 + static_cast<int>(rng.below(128)));
  return model;
}

std::vector<std::uint8_t> random_bits(Rng& rng, int d) {
  std::vector<std::uint8_t> b(d);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(2));
  return b;
}

}  // namespace

TEST_CASE("activation map row sums equal the class votes") {
  Rng rng(1);
  const auto model = random_model(rng, 4, 20, 10, 0.08);
  for (int i = 0; i < 1000; ++i) {
    const auto bits = random_bits(rng, 10);
    const auto lits = pack_literals(bits);
    const auto votes = class_votes(model, lits);
    const auto map = activation_map(model, lits);
    for (int c = 0; c < 4; ++c) {
      REQUIRE(map.signed_row_sum(c) == votes[c]);
      REQUIRE(votes[c] == model.class_score(lits, c));
      for (int j = 0; j < 20; ++j)
        REQUIRE(map.at(c, j) == static_cast<int>(evaluate_clause(model.clause(c, j), bits, ClauseMode::inference)));
    }
  }
}

TEST_CASE("untrained model has no active clauses") {
  TsetlinParams p;
  p.num_classes = 3;
  p.clauses_per_class = 6;
  const TsetlinModel model(p, names(4));
  const auto lits = pack_literals(std::vector<std::uint8_t>{1, 0, 1, 1});
  CHECK(class_votes(model, lits) == std::vector<int>{0, 0, 0});
  const auto map = activation_map(model, lits);
  CHECK(std::all_of(map.active.begin(), map.active.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("rule text re-parses to the same clause") {
  CHECK(rule_text({"x12", "x40"}, {0}, {1}) == "x12 AND NOT x40");
  Rng rng(2);
  for (int d = 1; d <= 6; ++d) {
    const auto model = random_model(rng, 2, 10, d, 0.2);
    for (int j = 0; j < 5; ++j) {
      const auto rules = render_rules(model, 1, 5, {});
      for (const auto& r : rules) {
        const auto parsed = parse_rule(r.text, model.feature_names());
        CHECK(parsed.positive == r.positive);
        CHECK(parsed.negated == r.negated);
        const std::set<int> pos(parsed.positive.begin(), parsed.positive.end());
        const std::set<int> neg(parsed.negated.begin(), parsed.negated.end());
        const Clause cl = model.clause(1, r.clause);
        for (unsigned x = 0; x < (1u << d); ++x) {
          std::vector<std::uint8_t> bits(d);
          for (int i = 0; i < d; ++i) bits[i] = (x >> i) & 1u;
          const std::vector<int> ib(bits.begin(), bits.end());
          REQUIRE(oracle::conjunction(ib, pos, neg, false) ==
                  static_cast<int>(evaluate_clause(cl, bits, ClauseMode::inference)));
        }
      }
    }
  }
}

TEST_CASE("rule ranking, clamping and the empty rule") {
  TsetlinParams p;
  p.clauses_per_class = 6;
  TsetlinModel model(p, names(3));
  model.set_state(0, 1, 0, 200);
  model.set_state(0, 1, 5, 200);
  std::vector<double> freq(12, 0.0);
  freq[1] = 0.5;
  freq[2] = 0.9;
  const auto rules = render_rules(model, 0, 100, freq);
  REQUIRE(rules.size() == 3);
  CHECK(rules[0].clause == 2);
  CHECK(rules[1].clause == 1);
  CHECK(rules[1].text == "x0 AND NOT x2");
  CHECK(rules[0].text == kEmptyRule);
  CHECK_FALSE(rules[0].warnings.empty());
  for (const auto& r : rules) CHECK(r.polarity == +1);
  CHECK(render_rules(model, 0, 1, freq).size() == 1);
  CHECK_THROWS_AS(render_rules(model, 0, 0, freq), UsageError);
  CHECK(parse_rule(kEmptyRule, model.feature_names()).positive.empty());
  CHECK_THROWS_AS(parse_rule("x9", model.feature_names()), DataError);
}

TEST_CASE("interval translation through the binner") {
  const QuantileBinner binner({"Rate", "IAT"}, {{-1.0, 0.5}, {0.0}}, 3);
  TsetlinParams p;
  p.clauses_per_class = 2;
  TsetlinModel model(p, binner.literal_names());
  model.set_state(1, 0, 2, 200);                                   // Rate#2
  model.set_state(1, 0, static_cast<int>(binner.output_width()) + 3, 200);  // NOT IAT#0
  StandardizerStats stats;
  stats.columns = {"Rate", "IAT"};
  stats.mean = {100.0, 0.0};
  stats.stddev = {10.0, 0.0};
  const auto rules = render_rules(model, 1, 1, {}, &binner, &stats);
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].text == "Rate#2 AND NOT IAT#0");
  REQUIRE(rules[0].intervals.size() == 2);
  CHECK(rules[0].intervals[0] == "Rate ∈ bin 2 [0.5, inf) (raw [105, inf))");
  CHECK(rules[0].intervals[1] == "NOT (IAT ∈ bin 0 (-inf, 0))");
}

TEST_CASE("exports are byte-deterministic") {
  Rng rng(9);
  const auto model = random_model(rng, 3, 8, 6, 0.15);
  const std::vector<std::string> classes{"Benign", "DoS", "A<&>\"B"};
  auto render = [&] {
    const auto lits = pack_literals(std::vector<std::uint8_t>{1, 0, 0, 1, 1, 0});
    std::ostringstream a, b, c, d;
    write_votes_csv(a, classes, class_votes(model, lits));
    write_activation_csv(b, activation_map(model, lits), classes);
    write_activation_svg(c, activation_map(model, lits), classes);
    const auto rules = render_rules(model, 0, 4, std::vector<double>(24, 0.25));
    write_rules_text(d, rules, classes);
    return a.str() + b.str() + c.str() + d.str() + rules_json(rules, classes).dump();
  };
  const auto first = render();
  CHECK(first == render());
  CHECK(first.find("A&lt;&amp;&gt;&quot;B") != std::string::npos);
  CHECK(first.find("class,vote\n") == 0);
  CHECK(first.find("class,+0,+1,+2,+3,-4,-5,-6,-7\n") != std::string::npos);
}

TEST_CASE("firing frequency counts inference-mode activations") {
  TsetlinParams p;
  p.clauses_per_class = 2;
  TsetlinModel model(p, names(2));
  model.set_state(0, 0, 0, 200);  // x0
  PackedDataset data(2);
  data.add(std::vector<std::uint8_t>{1, 0}, 0);
  data.add(std::vector<std::uint8_t>{1, 1}, 0);
  data.add(std::vector<std::uint8_t>{0, 1}, 1);
  data.add(std::vector<std::uint8_t>{0, 0}, 1);
  const auto f = firing_frequency(model, data);
  CHECK(f == std::vector<double>{0.5, 0.0, 0.0, 0.0});
}
