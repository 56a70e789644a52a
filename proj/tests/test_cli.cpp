#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/synthetic.hpp"
#include "tmids/commands.hpp"

using namespace tmids;
using namespace tmids::commands;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Small Bluetooth-shaped train/test files plus a config pointing at them.
struct Workspace {
  fs::path root;
  RunConfig cfg;

  explicit Workspace(const std::string& tag) {
    root = fs::temp_directory_path() / ("tmids_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root / "data");
    const auto spec = bluetooth_spec();
    Rng rng(11);
    auto file = [&](const std::string& name) { return (root / "data" / name).string(); };
    synth::write_flows(file("train_benign.csv"), spec, 0, 120, rng);
    synth::write_flows(file("train_dos.csv"), spec, 1, 40, rng);
    synth::write_flows(file("test_benign.csv"), spec, 0, 30, rng);
    synth::write_flows(file("test_dos.csv"), spec, 1, 30, rng);
    cfg = RunConfig::preset("S1");
    cfg.data["S1"] = {{file("train_benign.csv"), file("train_dos.csv")},
                      {file("test_benign.csv"), file("test_dos.csv")}};
    cfg.epochs = 3;
    cfg.number_of_clauses = 20;
    cfg.output_dir = (root / "out").string();
  }
  ~Workspace() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("prepare and train are deterministic for a fixed seed") {
  Workspace ws("det");
  auto a = ws.cfg, b = ws.cfg;
  a.output_dir = (ws.root / "a").string();
  b.output_dir = (ws.root / "b").string();
  for (const auto& c : {a, b}) {
    cmd_prepare(c);
    cmd_train(c);
  }
  for (const char* f : {"prepared/train_balanced.csv", "prepared/binner.json", "prepared/standardizer.json",
                        "model.tmm", "trace.csv"})
    CHECK(slurp(fs::path(a.output_dir) / f) == slurp(fs::path(b.output_dir) / f));
  CHECK(cmd_evaluate(a).to_json() == cmd_evaluate(b).to_json());
  CHECK(slurp(fs::path(a.output_dir) / "eval/report.json") == slurp(fs::path(b.output_dir) / "eval/report.json"));

  auto c = ws.cfg;
  c.output_dir = (ws.root / "c").string();
  c.seed = 7;
  cmd_prepare(c);
  cmd_train(c);
  CHECK(slurp(fs::path(a.output_dir) / "model.tmm") != slurp(fs::path(c.output_dir) / "model.tmm"));
}

TEST_CASE("end-to-end run on separable synthetic flows") {
  Workspace ws("e2e");
  const auto prep = cmd_prepare(ws.cfg);
  CHECK(prep.balanced_counts[0] == prep.balanced_counts[1]);

  // SMOTE touches the training split only.
  const auto out = fs::path(ws.cfg.output_dir);
  CHECK(line_count(out / "prepared/test_clean.csv") == 1 + prep.test_clean.output_rows);
  CHECK(line_count(out / "prepared/train_clean.csv") == 1 + prep.train_clean.output_rows);
  CHECK(line_count(out / "prepared/train_balanced.csv") == 1 + prep.balanced_counts[0] + prep.balanced_counts[1]);

  const auto trained = cmd_train(ws.cfg);
  CHECK(trained.trace.size() == 3);
  CHECK(fs::exists(out / "model.tmm"));
  const auto report = cmd_evaluate(ws.cfg, {"", {}, true});
  CHECK(report.metrics.accuracy >= 0.9);
  REQUIRE(report.latency.has_value());
  CHECK(report.latency->mean_us > 0.0);
  CHECK(fs::exists(out / "eval/metrics.csv"));
  CHECK(fs::exists(out / "eval/confusion_matrix.csv"));

  const auto pred = cmd_predict(ws.cfg, {"", {(ws.root / "data/test_dos.csv").string()}});
  CHECK(line_count(pred) == 31);

  const auto files = cmd_explain(ws.cfg, {"", {}, {0, 5}, 3});
  CHECK(files.size() == 10);
  for (const auto& f : files) CHECK(fs::file_size(f) > 0);
  CHECK_THROWS_AS(cmd_explain(ws.cfg, {"", {}, {100000}, 3}), UsageError);

  const auto bench = cmd_bench(ws.cfg, {"", {}, 2});
  CHECK(bench.samples >= 100);
  CHECK(fs::exists(out / "bench/bench.json"));
}

TEST_CASE("zero epochs gives an untrained model with zero votes") {
  Workspace ws("zero");
  ws.cfg.epochs = 0;
  cmd_prepare(ws.cfg);
  cmd_train(ws.cfg);
  const auto model = PipelineModel::load((fs::path(ws.cfg.output_dir) / "model.tmm").string());
  std::vector<double> row(27, 50.0);
  CHECK(model.tm.class_votes(pack_literals(model.binarize(row))) == std::vector<int>{0, 0});
  const auto pred = cmd_predict(ws.cfg, {"", {}});
  const auto text = slurp(pred);
  CHECK(text.find(",Benign,0,0\n") != std::string::npos);
  CHECK(text.find(",DoS,") == std::string::npos);
}

TEST_CASE("majority model and cross-validation") {
  Workspace ws("maj");
  cmd_prepare(ws.cfg);
  auto m = ws.cfg;
  m.model = "majority";
  const auto trained = cmd_train(m);
  CHECK(trained.model_path.filename() == "majority.json");
  const auto report = cmd_evaluate(m);
  CHECK(report.metrics.accuracy == 0.5);  // test split is 30/30, majority is Benign
  CHECK(report.confusion.at(1, 0) == 30);

  auto cv = ws.cfg;
  cv.folds = 3;
  const auto r = cmd_cv(cv);
  CHECK(r.folds.size() == 3);
  CHECK(r.confusion.total() == 160);
  CHECK(fs::exists(fs::path(cv.output_dir) / "cv/folds.csv"));
  CHECK(cmd_cv(m).metrics.accuracy == 0.75);
}

TEST_CASE("failures leave no partial output") {
  Workspace ws("fail");
  auto cfg = ws.cfg;
  cfg.data["S1"].train.push_back((ws.root / "data/missing.csv").string());
  CHECK_THROWS_AS(cmd_prepare(cfg), DataError);
  CHECK_FALSE(fs::exists(cfg.output_dir));
  CHECK_THROWS_AS(cmd_train(ws.cfg), DataError);
  CHECK_THROWS_AS(cmd_evaluate(ws.cfg), DataError);

  auto bad = ws.cfg;
  bad.specificity = 1.0;
  CHECK_THROWS_AS(cmd_prepare(bad), UsageError);
  CHECK_FALSE(fs::exists(bad.output_dir));
}

TEST_CASE("config round-trips through JSON and presets fill gaps") {
  RunConfig c = RunConfig::preset("S2");
  c.data["S2"] = {{"a.csv"}, {"b.csv", "c"}};
  c.seed = 99;
  c.subsample = 0.02;
  CHECK(RunConfig::from_json(nlohmann::json::parse(c.to_json().dump())) == c);

  const auto partial = RunConfig::from_json({{"scenario", "S3"}, {"epochs", 2}});
  CHECK(partial.number_of_clauses == 120);
  CHECK(partial.threshold == 15);
  CHECK(partial.epochs == 2);
  CHECK(RunConfig::preset("S2").specificity == 5.0);
  CHECK_THROWS_AS(RunConfig::preset("S4"), UsageError);

  const auto shipped = RunConfig::load((fs::path(TMIDS_SOURCE_DIR) / "configs/s1.json").string());
  CHECK_NOTHROW(shipped.validate());
  CHECK(shipped.scenario == "S1");
}

TEST_CASE("per-stage seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (auto s : {Stream::subsample, Stream::smote, Stream::train, Stream::folds}) seen.insert(derive_seed(42, s));
  CHECK(seen.size() == 4);
  CHECK(derive_seed(42, Stream::train) == derive_seed(42, Stream::train));
  CHECK(derive_seed(42, Stream::train) != derive_seed(43, Stream::train));
}
