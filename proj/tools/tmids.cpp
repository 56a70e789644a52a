// tmids command-line front end.
//
//   tmids prepare  --config configs/s1.json
//   tmids train    --config configs/s1.json [--model majority]
//   tmids evaluate --config configs/s1.json [--with-latency]
//   tmids cv       --config configs/s1.json
//   tmids predict  --config configs/s1.json --input flows.csv
//   tmids explain  --config configs/s1.json --rows 0 --rows 7 --top-k 5
//   tmids bench    --config configs/s1.json
//
// Exit codes: 0 ok, 2 usage error, 3 data error, 4 anything else.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tmids/commands.hpp"

using namespace tmids;
using namespace tmids::commands;

namespace {

struct Overrides {
  std::string config;
  std::string scenario;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<double> subsample;
  std::optional<int> epochs;
  std::optional<int> clauses;
  std::optional<int> threshold;
  std::optional<double> specificity;
  std::optional<std::string> model;
  std::optional<int> threads;
  std::optional<std::string> averaging;
  std::optional<int> folds;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config, "run configuration (JSON)");
  sub->add_option("--scenario", o.scenario, "S1, S2 or S3; selects the preset when no config is given");
  sub->add_option("-o,--output", o.output, "output directory");
  sub->add_option("--seed", o.seed);
  sub->add_option("--subsample", o.subsample, "stratified fraction of each split, in (0, 1]");
  sub->add_option("--epochs", o.epochs);
  sub->add_option("--clauses", o.clauses, "number_of_clauses");
  sub->add_option("-T,--threshold", o.threshold);
  sub->add_option("-s,--specificity", o.specificity);
  sub->add_option("--model", o.model, "tm or majority")->check(CLI::IsMember({"tm", "majority"}));
  sub->add_option("--threads", o.threads);
  sub->add_option("--averaging", o.averaging)->check(CLI::IsMember({"macro", "weighted"}));
  sub->add_option("--folds", o.folds);
  sub->add_option("--train", o.train, "training CSV files or folders (replaces the config entry)");
  sub->add_option("--test", o.test, "test CSV files or folders (replaces the config entry)");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) {
    c = RunConfig::load(o.config);
    if (!o.scenario.empty() && o.scenario != c.scenario)
      throw UsageError("--scenario " + o.scenario + " conflicts with config scenario " + c.scenario);
  } else {
    c = RunConfig::preset(o.scenario.empty() ? "S1" : o.scenario);
  }
  if (!o.output.empty()) c.output_dir = o.output;
  if (o.seed) c.seed = *o.seed;
  if (o.subsample) c.subsample = *o.subsample;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.clauses) c.number_of_clauses = *o.clauses;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.specificity) c.specificity = *o.specificity;
  if (o.model) c.model = *o.model;
  if (o.threads) c.threads = *o.threads;
  if (o.averaging) c.averaging = *o.averaging;
  if (o.folds) c.folds = *o.folds;
  if (!o.train.empty() || !o.test.empty()) {
    if (c.scenario == "S3") throw UsageError("--train/--test need a single-protocol scenario; use a config for S3");
    auto& split = c.data[c.scenario];
    if (!o.train.empty()) split.train = o.train;
    if (!o.test.empty()) split.test = o.test;
  }
  c.validate();
  return c;
}

void print_metrics(const EvalReport& r) {
  std::printf("accuracy  %.4f\nprecision %.4f\nrecall    %.4f\nf1        %.4f\n", r.metrics.accuracy,
              r.metrics.precision, r.metrics.recall, r.metrics.f1);
  for (const auto& w : r.metrics.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tsetlin Machine intrusion detection on IoMT flow features"};
  app.require_subcommand(1);

  Overrides o;
  std::string model_path;
  std::vector<std::string> inputs;
  std::vector<std::size_t> rows{0};
  int top_k = 10;
  int repetitions = 20;
  bool with_latency = false;

  auto* prepare = app.add_subcommand("prepare", "load, subsample, clean, standardize, oversample and fit the binner");
  auto* train = app.add_subcommand("train", "train on prepared data and write the model");
  auto* evaluate = app.add_subcommand("evaluate", "score a model on the test split or given inputs");
  auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation on the cleaned training split");
  auto* predict = app.add_subcommand("predict", "label each input row and print the vote vector");
  auto* explain = app.add_subcommand("explain", "export votes, clause activations and rules for chosen rows");
  auto* bench = app.add_subcommand("bench", "single-sample inference latency");
  for (auto* sub : {prepare, train, evaluate, cv, predict, explain, bench}) add_common(sub, o);
  for (auto* sub : {evaluate, predict, explain, bench}) {
    sub->add_option("--model-path", model_path, "model file (default <output>/model.tmm)");
    sub->add_option("-i,--input", inputs, "CSV files or folders (default: prepared test split)");
  }
  evaluate->add_flag("--with-latency", with_latency, "also time single-sample inference");
  explain->add_option("--rows", rows, "row indices to explain")->expected(1, -1);
  explain->add_option("--top-k", top_k, "rules to print");
  bench->add_option("--repetitions", repetitions);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (*prepare) {
      const auto s = cmd_prepare(cfg);
      std::printf("train: %zu rows kept (%zu missing, %zu duplicate dropped)\n", s.train_clean.output_rows,
                  s.train_clean.dropped_missing, s.train_clean.dropped_duplicates);
      std::printf("test:  %zu rows kept (%zu missing, %zu duplicate dropped)\n", s.test_clean.output_rows,
                  s.test_clean.dropped_missing, s.test_clean.dropped_duplicates);
      for (const auto& w : s.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("wrote %s\n", prepared_dir(cfg).string().c_str());
    } else if (*train) {
      const auto s = cmd_train(cfg);
      for (const auto& e : s.trace)
        std::printf("epoch %d  train %.4f  test %.4f\n", e.epoch, e.train_accuracy, e.test_accuracy);
      std::printf("wrote %s\n", s.model_path.string().c_str());
    } else if (*evaluate) {
      const auto r = cmd_evaluate(cfg, {model_path, inputs, with_latency});
      print_metrics(r);
      if (r.latency) std::printf("latency   %.3f us mean\n", r.latency->mean_us);
    } else if (*cv) {
      const auto r = cmd_cv(cfg);
      for (const auto& f : r.folds) std::printf("fold %d  accuracy %.4f  f1 %.4f\n", f.fold, f.metrics.accuracy, f.metrics.f1);
      print_metrics(r);
    } else if (*predict) {
      std::printf("wrote %s\n", cmd_predict(cfg, {model_path, inputs}).string().c_str());
    } else if (*explain) {
      for (const auto& p : cmd_explain(cfg, {model_path, inputs, rows, top_k})) std::printf("wrote %s\n", p.string().c_str());
    } else if (*bench) {
      const auto s = cmd_bench(cfg, {model_path, inputs, repetitions});
      std::printf("mean %.3f us  p50 %.3f us  p99 %.3f us  (%zu calls, %s)\n", s.mean_us, s.p50_us, s.p99_us, s.samples,
                  s.cpu.c_str());
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
