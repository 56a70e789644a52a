#pragma once

// Pipeline commands behind the CLI: prepare -> train -> evaluate / cv /
// predict / explain / bench. Every command reads its inputs, computes
// everything, and only then writes under config.output_dir.
//
// Output layout:
//   <out>/prepared/{train_clean,test_clean,train_balanced}.csv
//   <out>/prepared/{standardizer,binner,prepare_report}.json, class_distribution.csv
//   <out>/model.tmm, <out>/trace.csv          (or <out>/majority.json)
//   <out>/eval/{report.json,metrics.csv,confusion_matrix.csv}
//   <out>/cv/{report.json,folds.csv}
//   <out>/predict/predictions.csv
//   <out>/explain/row<i>_{votes.csv,heatmap.csv,heatmap.svg,rules.txt,rules.json}
//   <out>/bench/{bench.json,bench.csv}

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tmids/baseline.hpp"
#include "tmids/binarizer.hpp"
#include "tmids/config.hpp"
#include "tmids/csv.hpp"
#include "tmids/explain.hpp"
#include "tmids/ingest.hpp"
#include "tmids/metrics.hpp"
#include "tmids/model_io.hpp"
#include "tmids/preprocess.hpp"
#include "tmids/tsetlin.hpp"

namespace tmids::commands {

namespace fs = std::filesystem;

// Independent RNG stream per pipeline stage.
enum class Stream : std::uint64_t { subsample = 1, smote = 2, train = 3, folds = 4 };

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Scenario plumbing

struct Manifests {
  ScenarioSpec bluetooth = bluetooth_spec();
  ScenarioSpec wifi = wifi_mqtt_spec();
};

inline ScenarioSpec read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  try {
    return ScenarioSpec::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest '" + path + "': " + e.what());
  }
}

inline Manifests load_manifests(const RunConfig& cfg) {
  Manifests m;
  if (!cfg.manifest_dir.empty()) {
    m.bluetooth = read_manifest((fs::path(cfg.manifest_dir) / "s1.json").string());
    m.wifi = read_manifest((fs::path(cfg.manifest_dir) / "s2.json").string());
  }
  return m;
}

inline ScenarioSpec scenario_spec(const RunConfig& cfg, const Manifests& m) {
  if (cfg.scenario == "S1") return m.bluetooth;
  if (cfg.scenario == "S2") return m.wifi;
  return combined_spec(m.bluetooth, m.wifi);
}

inline const SplitFiles& data_for(const RunConfig& cfg, const std::string& id) {
  const auto it = cfg.data.find(id);
  if (it == cfg.data.end() || it->second.train.empty() || it->second.test.empty())
    throw UsageError("config has no train/test inputs for " + id + " (data." + id + ".train/test)");
  return it->second;
}

inline ScenarioData load_scenario(const RunConfig& cfg, const Manifests& m) {
  if (cfg.scenario == "S1") return assemble_scenario(m.bluetooth, data_for(cfg, "S1"));
  if (cfg.scenario == "S2") return assemble_scenario(m.wifi, data_for(cfg, "S2"));
  return assemble_combined(m.bluetooth, data_for(cfg, "S1"), m.wifi, data_for(cfg, "S2"));
}

// Schema for reading model inputs: the model's columns, with every other
// known protocol column ignored.
inline ScenarioSpec prediction_spec(const PipelineModel& model, const Manifests& m) {
  ScenarioSpec s;
  s.id = model.scenario;
  s.features = model.standardizer.columns;
  s.classes = model.class_names;
  std::set<std::string> keep(s.features.begin(), s.features.end()), ignored;
  for (const auto* spec : {&m.wifi, &m.bluetooth}) {
    for (const auto& f : spec->features)
      if (!keep.count(f)) ignored.insert(f);
    for (const auto& f : spec->ignored_columns)
      if (!keep.count(f)) ignored.insert(f);
    for (const auto& [from, to] : spec->column_aliases) s.column_aliases.emplace(from, to);
    for (const auto& r : spec->label_rules)
      if (s.class_index(r.label) >= 0) s.label_rules.push_back(r);
  }
  s.ignored_columns.assign(ignored.begin(), ignored.end());
  return s;
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'; run the earlier pipeline step first");
  return nlohmann::json::parse(in);
}

inline std::string table_csv(const FlowTable& t) {
  std::ostringstream out;
  csv::Writer w(out);
  std::vector<std::string> header = t.columns;
  header.push_back("label");
  w.row(header);
  std::vector<std::string> row(t.cols() + 1);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) row[c] = csv::format_number(t.at(r, c));
    row[t.cols()] = t.class_names.at(static_cast<std::size_t>(t.labels[r]));
    w.row(row);
  }
  return out.str();
}

inline fs::path prepared_dir(const RunConfig& cfg) { return fs::path(cfg.output_dir) / "prepared"; }
inline fs::path default_model_path(const RunConfig& cfg) { return fs::path(cfg.output_dir) / "model.tmm"; }

// ---------------------------------------------------------------------------
// Shared pipeline stages

struct FittedPreprocessing {
  StandardizerStats standardizer;
  FlowTable balanced;  // standardized, oversampled training rows
  QuantileBinner binner;
  std::vector<std::size_t> synthetic;
  std::vector<std::string> warnings;
};

// Standardizer, SMOTE and binner, fit on cleaned training rows only.
inline FittedPreprocessing fit_preprocessing(const FlowTable& clean_train, const RunConfig& cfg, Rng& smote_rng) {
  FittedPreprocessing p;
  p.standardizer = StandardizerStats::fit(clean_train);
  FlowTable z = p.standardizer.apply(clean_train);
  if (cfg.smote) {
    auto res = smote(z, cfg.smote_k, smote_rng);
    p.balanced = std::move(res.table);
    p.synthetic = std::move(res.synthetic);
    p.warnings = std::move(res.warnings);
  } else {
    p.balanced = std::move(z);
    p.synthetic.assign(p.balanced.class_names.size(), 0);
  }
  p.binner = QuantileBinner::fit(p.balanced, cfg.n_bins);
  return p;
}

inline PackedDataset pack_standardized(const QuantileBinner& binner, const FlowTable& z) {
  PackedDataset out(static_cast<int>(binner.output_width()));
  std::vector<std::uint8_t> bits(binner.output_width());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    binner.transform_into(z.row(r), bits);
    out.add(bits, z.labels[r]);
  }
  return out;
}

inline std::vector<int> predict_all(const TsetlinModel& tm, const PackedDataset& data, int threads) {
  std::vector<int> out(data.size());
  const auto n = data.size();
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = tm.predict(data.literals(i));
  };
  if (workers == 1 || n < 2 * workers) {
    run(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back(run, lo, hi);
  }
  for (auto& t : pool) t.join();
  return out;
}

struct TrainedPipeline {
  PipelineModel model;
  TrainingTrace trace;
};

inline TrainedPipeline train_pipeline(const FittedPreprocessing& prep, const std::string& scenario,
                                      const RunConfig& cfg, Rng& rng, const FlowTable* holdout_raw) {
  TrainedPipeline t;
  auto& m = t.model;
  m.scenario = scenario;
  m.class_names = prep.balanced.class_names;
  m.standardizer = prep.standardizer;
  m.binner = prep.binner;
  m.tm = TsetlinModel(cfg.machine_params(static_cast<int>(m.class_names.size())), prep.binner.literal_names());
  const PackedDataset train = pack_standardized(prep.binner, prep.balanced);
  PackedDataset holdout;
  if (holdout_raw) holdout = m.pack(*holdout_raw);
  if (cfg.epochs > 0) t.trace = fit(m.tm, train, cfg.epochs, rng, holdout_raw ? &holdout : nullptr);
  m.epochs_trained = static_cast<std::uint32_t>(cfg.epochs);
  m.firing_frequency = firing_frequency(m.tm, train);
  return t;
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareSummary {
  CleanStats train_clean;
  CleanStats test_clean;
  std::vector<std::size_t> balanced_counts;
  std::vector<std::string> warnings;
};

inline PrepareSummary cmd_prepare(const RunConfig& cfg) {
  cfg.validate();
  const Manifests manifests = load_manifests(cfg);
  ScenarioData data = load_scenario(cfg, manifests);
  const auto raw_train_counts = data.train.class_counts();
  const auto raw_test_counts = data.test.class_counts();

  Rng sub_rng(derive_seed(cfg.seed, Stream::subsample));
  if (cfg.subsample < 1.0) {
    data.train = stratified_subsample(data.train, cfg.subsample, sub_rng);
    data.test = stratified_subsample(data.test, cfg.subsample, sub_rng);
  }
  const auto sampled_train_counts = data.train.class_counts();
  const auto sampled_test_counts = data.test.class_counts();

  auto train = clean(data.train);
  auto test = clean(data.test);
  Rng smote_rng(derive_seed(cfg.seed, Stream::smote));
  const FittedPreprocessing prep = fit_preprocessing(train.table, cfg, smote_rng);

  PrepareSummary summary;
  summary.train_clean = train.stats;
  summary.test_clean = test.stats;
  summary.balanced_counts = prep.balanced.class_counts();
  summary.warnings = prep.warnings;

  std::ostringstream dist;
  csv::Writer w(dist);
  w.row(std::vector<std::string>{"split", "stage", "class", "count"});
  auto emit = [&](const std::string& split, const std::string& stage, const std::vector<std::size_t>& counts) {
    for (std::size_t c = 0; c < counts.size(); ++c)
      w.row(std::vector<std::string>{split, stage, data.spec.classes[c], std::to_string(counts[c])});
  };
  emit("train", "loaded", raw_train_counts);
  emit("train", "subsampled", sampled_train_counts);
  emit("train", "cleaned", train.table.class_counts());
  emit("train", "balanced", summary.balanced_counts);
  emit("test", "loaded", raw_test_counts);
  emit("test", "subsampled", sampled_test_counts);
  emit("test", "cleaned", test.table.class_counts());

  auto clean_json = [](const CleanStats& s) {
    return nlohmann::json{{"input_rows", s.input_rows},
                          {"dropped_missing", s.dropped_missing},
                          {"dropped_duplicates", s.dropped_duplicates},
                          {"output_rows", s.output_rows}};
  };
  const nlohmann::json report = {{"scenario", cfg.scenario},
                                 {"classes", data.spec.classes},
                                 {"features", data.spec.features},
                                 {"seed", cfg.seed},
                                 {"subsample", cfg.subsample},
                                 {"clean", {{"train", clean_json(train.stats)}, {"test", clean_json(test.stats)}}},
                                 {"smote", {{"enabled", cfg.smote}, {"k_neighbors", cfg.smote_k},
                                            {"synthetic_per_class", prep.synthetic}}},
                                 {"warnings", prep.warnings}};

  const fs::path dir = prepared_dir(cfg);
  fs::create_directories(dir);
  write_text(dir / "train_clean.csv", table_csv(train.table));
  write_text(dir / "test_clean.csv", table_csv(test.table));
  write_text(dir / "train_balanced.csv", table_csv(prep.balanced));
  write_text(dir / "standardizer.json", json_text(prep.standardizer.to_json()));
  write_text(dir / "binner.json", json_text(prep.binner.to_json()));
  write_text(dir / "class_distribution.csv", dist.str());
  write_text(dir / "prepare_report.json", json_text(report));
  write_text(dir / "config.json", json_text(cfg.to_json()));
  return summary;
}

// Prepared tables reloaded under the scenario schema.
struct PreparedArtifacts {
  ScenarioSpec spec;
  FlowTable train_clean;
  FlowTable test_clean;
  FlowTable train_balanced;
  StandardizerStats standardizer;
  QuantileBinner binner;
};

inline PreparedArtifacts load_prepared(const RunConfig& cfg) {
  const fs::path dir = prepared_dir(cfg);
  for (const char* f : {"train_clean.csv", "test_clean.csv", "train_balanced.csv", "standardizer.json", "binner.json"})
    if (!fs::exists(dir / f))
      throw DataError("missing prepared artifact '" + (dir / f).string() + "'; run 'prepare' first");
  PreparedArtifacts a;
  a.spec = scenario_spec(cfg, load_manifests(cfg));
  ScenarioSpec exact = a.spec;
  exact.ignored_columns.clear();
  exact.column_aliases.clear();
  a.train_clean = load_csv((dir / "train_clean.csv").string(), exact);
  a.test_clean = load_csv((dir / "test_clean.csv").string(), exact);
  a.train_balanced = load_csv((dir / "train_balanced.csv").string(), exact);
  a.standardizer = StandardizerStats::from_json(read_json(dir / "standardizer.json"));
  a.binner = QuantileBinner::from_json(read_json(dir / "binner.json"));
  if (a.standardizer.columns != a.spec.features || a.binner.feature_names() != a.spec.features)
    throw DataError("prepared artifacts in '" + dir.string() + "' were built for a different scenario schema");
  return a;
}

// ---------------------------------------------------------------------------
// train

struct TrainSummary {
  fs::path model_path;
  TrainingTrace trace;
};

inline TrainSummary cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const PreparedArtifacts a = load_prepared(cfg);
  TrainSummary s;
  if (cfg.model == "majority") {
    const auto m = MajorityModel::fit(a.train_clean.labels, static_cast<int>(a.spec.classes.size()));
    s.model_path = fs::path(cfg.output_dir) / "majority.json";
    write_text(s.model_path, json_text({{"format", "tmids-majority"},
                                        {"scenario", cfg.scenario},
                                        {"classes", a.spec.classes},
                                        {"majority_class", m.majority_class}}));
    return s;
  }
  cfg.machine_params(static_cast<int>(a.spec.classes.size())).validate();

  FittedPreprocessing prep;
  prep.standardizer = a.standardizer;
  prep.balanced = a.train_balanced;
  prep.binner = a.binner;
  Rng rng(derive_seed(cfg.seed, Stream::train));
  TrainedPipeline t = train_pipeline(prep, cfg.scenario, cfg, rng, &a.test_clean);

  std::ostringstream trace;
  csv::Writer w(trace);
  w.row(std::vector<std::string>{"epoch", "train_accuracy", "test_accuracy"});
  for (const auto& e : t.trace)
    w.row(std::vector<std::string>{std::to_string(e.epoch), csv::format_number(e.train_accuracy),
                                   csv::format_number(e.test_accuracy)});

  fs::create_directories(cfg.output_dir);
  s.model_path = default_model_path(cfg);
  t.model.save(s.model_path.string());
  write_text(fs::path(cfg.output_dir) / "trace.csv", trace.str());
  s.trace = std::move(t.trace);
  return s;
}

// ---------------------------------------------------------------------------
// evaluate / predict / explain / bench

inline PipelineModel load_model(const RunConfig& cfg, const std::string& model_path) {
  return PipelineModel::load(model_path.empty() ? default_model_path(cfg).string() : model_path);
}

// Input rows for a model: explicit CSV paths, or the prepared test split.
inline FlowTable model_inputs(const RunConfig& cfg, const PipelineModel& model,
                              const std::vector<std::string>& inputs, bool require_labels) {
  const ScenarioSpec spec = prediction_spec(model, load_manifests(cfg));
  if (inputs.empty()) {
    const fs::path p = prepared_dir(cfg) / "test_clean.csv";
    if (!fs::exists(p)) throw DataError("no input given and '" + p.string() + "' does not exist");
    return load_csv(p.string(), spec, require_labels);
  }
  FlowTable t;
  t.columns = spec.features;
  t.class_names = spec.classes;
  t.scenario = spec.id;
  for (const auto& f : expand_inputs(inputs)) append_rows(t, load_csv(f, spec, require_labels));
  return t;
}

inline std::string metrics_csv(const EvalReport& r) {
  std::ostringstream out;
  csv::Writer w(out);
  w.row(std::vector<std::string>{"Model", "Accuracy", "Precision", "Recall", "F1-score", "Inference time (us)"});
  w.row(std::vector<std::string>{r.model == "tm" ? "TM" : r.model, csv::format_number(r.metrics.accuracy),
                                 csv::format_number(r.metrics.precision), csv::format_number(r.metrics.recall),
                                 csv::format_number(r.metrics.f1),
                                 r.latency ? csv::format_number(r.latency->mean_us) : std::string()});
  return out.str();
}

inline std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names) {
  std::ostringstream out;
  csv::Writer w(out);
  std::vector<std::string> header{"true\\predicted"};
  header.insert(header.end(), names.begin(), names.end());
  w.row(header);
  for (int t = 0; t < cm.num_classes(); ++t) {
    std::vector<std::string> row{names.at(static_cast<std::size_t>(t))};
    for (int p = 0; p < cm.num_classes(); ++p) row.push_back(std::to_string(cm.at(t, p)));
    w.row(row);
  }
  return out.str();
}

struct EvaluateOptions {
  std::string model_path;
  std::vector<std::string> inputs;
  bool with_latency = false;
};

inline EvalReport cmd_evaluate(const RunConfig& cfg, const EvaluateOptions& opt = {}) {
  cfg.validate();
  EvalReport report;
  report.scenario = cfg.scenario;
  report.averaging = parse_averaging(cfg.averaging);
  report.model = cfg.model;
  std::vector<int> truth, predicted;

  if (cfg.model == "majority") {
    const auto j = read_json(opt.model_path.empty() ? fs::path(cfg.output_dir) / "majority.json" : fs::path(opt.model_path));
    MajorityModel m;
    m.majority_class = j.at("majority_class").get<int>();
    report.class_names = j.at("classes").get<std::vector<std::string>>();
    m.num_classes = static_cast<int>(report.class_names.size());
    ScenarioSpec spec = scenario_spec(cfg, load_manifests(cfg));
    FlowTable test;
    if (opt.inputs.empty()) {
      ScenarioSpec exact = spec;
      exact.ignored_columns.clear();
      test = load_csv((prepared_dir(cfg) / "test_clean.csv").string(), exact);
    } else {
      test = load_all(opt.inputs, spec);
    }
    test = clean(test).table;
    truth = test.labels;
    predicted.assign(truth.size(), m.majority_class);
  } else {
    const PipelineModel model = load_model(cfg, opt.model_path);
    report.class_names = model.class_names;
    const FlowTable test = clean(model_inputs(cfg, model, opt.inputs, true)).table;
    const PackedDataset packed = model.pack(test);
    truth = test.labels;
    predicted = predict_all(model.tm, packed, cfg.threads);
    if (opt.with_latency && packed.size() > 0) {
      const std::size_t n = std::min<std::size_t>(packed.size(), 1000);
      const int reps = static_cast<int>(std::max<std::size_t>(1, (1000 + n - 1) / n));
      report.latency = measure_latency([&](std::size_t i) { return model.tm.predict(packed.literals(i)); }, n,
                                       std::max(reps, n < 100 ? static_cast<int>((100 + n - 1) / n) : 1));
    }
  }
  report.confusion = ConfusionMatrix::from_predictions(static_cast<int>(report.class_names.size()), truth, predicted);
  report.metrics = compute_metrics(report.confusion, report.averaging);

  const fs::path dir = fs::path(cfg.output_dir) / "eval";
  fs::create_directories(dir);
  write_text(dir / "report.json", json_text(report.to_json()));
  write_text(dir / "metrics.csv", metrics_csv(report));
  write_text(dir / "confusion_matrix.csv", confusion_csv(report.confusion, report.class_names));
  return report;
}

inline EvalReport cmd_cv(const RunConfig& cfg) {
  cfg.validate();
  const PreparedArtifacts a = load_prepared(cfg);
  Rng rng(derive_seed(cfg.seed, Stream::folds));
  const Averaging avg = parse_averaging(cfg.averaging);
  EvalReport report;
  if (cfg.model == "majority") {
    report = kfold_cv(
        a.train_clean, cfg.folds,
        [&](const FlowTable& train, const FlowTable& test, Rng&) {
          const auto m = MajorityModel::fit(train.labels, static_cast<int>(train.class_names.size()));
          return std::vector<int>(test.rows(), m.majority_class);
        },
        rng, avg);
  } else {
    report = kfold_cv(
        a.train_clean, cfg.folds,
        [&](const FlowTable& train, const FlowTable& test, Rng& fold_rng) {
          Rng smote_rng(fold_rng());
          const FittedPreprocessing prep = fit_preprocessing(train, cfg, smote_rng);
          TrainedPipeline t = train_pipeline(prep, cfg.scenario, cfg, fold_rng, nullptr);
          return predict_all(t.model.tm, t.model.pack(test), cfg.threads);
        },
        rng, avg);
  }
  report.model = cfg.model;

  std::ostringstream folds;
  csv::Writer w(folds);
  w.row(std::vector<std::string>{"fold", "train_rows", "test_rows", "accuracy", "precision", "recall", "f1"});
  for (const auto& f : report.folds)
    w.row(std::vector<std::string>{std::to_string(f.fold), std::to_string(f.train_rows), std::to_string(f.test_rows),
                                   csv::format_number(f.metrics.accuracy), csv::format_number(f.metrics.precision),
                                   csv::format_number(f.metrics.recall), csv::format_number(f.metrics.f1)});
  const fs::path dir = fs::path(cfg.output_dir) / "cv";
  fs::create_directories(dir);
  write_text(dir / "report.json", json_text(report.to_json()));
  write_text(dir / "folds.csv", folds.str());
  return report;
}

struct PredictOptions {
  std::string model_path;
  std::vector<std::string> inputs;
};

// One output row per input row: predicted class and the vote vector.
inline fs::path cmd_predict(const RunConfig& cfg, const PredictOptions& opt) {
  cfg.validate();
  const PipelineModel model = load_model(cfg, opt.model_path);
  const FlowTable input = model_inputs(cfg, model, opt.inputs, false);
  std::ostringstream out;
  csv::Writer w(out);
  std::vector<std::string> header{"row", "predicted"};
  for (const auto& c : model.class_names) header.push_back("vote_" + c);
  w.row(header);
  for (std::size_t r = 0; r < input.rows(); ++r) {
    std::vector<std::uint8_t> bits;
    try {
      bits = model.binarize(input.row(r));
    } catch (const DataError& e) {
      throw DataError("input row " + std::to_string(r) + ": " + e.what());
    }
    const auto lits = pack_literals(bits);
    const auto votes = model.tm.class_votes(lits);
    const int pred = model.tm.predict(lits);
    std::vector<std::string> row{std::to_string(r), model.class_names[static_cast<std::size_t>(pred)]};
    for (int v : votes) row.push_back(std::to_string(v));
    w.row(row);
  }
  const fs::path dir = fs::path(cfg.output_dir) / "predict";
  fs::create_directories(dir);
  write_text(dir / "predictions.csv", out.str());
  return dir / "predictions.csv";
}

struct ExplainOptions {
  std::string model_path;
  std::vector<std::string> inputs;
  std::vector<std::size_t> rows{0};
  int top_k = 10;
};

inline std::vector<fs::path> cmd_explain(const RunConfig& cfg, const ExplainOptions& opt) {
  cfg.validate();
  const PipelineModel model = load_model(cfg, opt.model_path);
  const FlowTable input = model_inputs(cfg, model, opt.inputs, false);

  struct Export {
    std::string name;
    std::string content;
  };
  std::vector<Export> exports;
  for (auto r : opt.rows) {
    if (r >= input.rows())
      throw UsageError("row " + std::to_string(r) + " is out of range (input has " + std::to_string(input.rows()) +
                       " rows)");
    const auto lits = pack_literals(model.binarize(input.row(r)));
    const auto votes = class_votes(model.tm, lits);
    const auto map = activation_map(model.tm, lits);
    const int pred = model.tm.predict(lits);
    const auto rules = render_rules(model.tm, pred, opt.top_k, model.firing_frequency, &model.binner,
                                    &model.standardizer);
    const std::string stem = "row" + std::to_string(r);
    std::ostringstream v, hc, hs, rt;
    write_votes_csv(v, model.class_names, votes);
    write_activation_csv(hc, map, model.class_names);
    write_activation_svg(hs, map, model.class_names);
    rt << "predicted: " << model.class_names[static_cast<std::size_t>(pred)] << "\n";
    write_rules_text(rt, rules, model.class_names);
    const nlohmann::json rj = {{"row", r},
                               {"predicted", model.class_names[static_cast<std::size_t>(pred)]},
                               {"votes", votes},
                               {"rules", rules_json(rules, model.class_names)}};
    exports.push_back({stem + "_votes.csv", v.str()});
    exports.push_back({stem + "_heatmap.csv", hc.str()});
    exports.push_back({stem + "_heatmap.svg", hs.str()});
    exports.push_back({stem + "_rules.txt", rt.str()});
    exports.push_back({stem + "_rules.json", json_text(rj)});
  }
  const fs::path dir = fs::path(cfg.output_dir) / "explain";
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (const auto& e : exports) {
    write_text(dir / e.name, e.content);
    written.push_back(dir / e.name);
  }
  return written;
}

struct BenchOptions {
  std::string model_path;
  std::vector<std::string> inputs;
  int repetitions = 20;
};

inline LatencyStats cmd_bench(const RunConfig& cfg, const BenchOptions& opt) {
  cfg.validate();
  const PipelineModel model = load_model(cfg, opt.model_path);
  const FlowTable input = clean(model_inputs(cfg, model, opt.inputs, false)).table;
  const PackedDataset packed = model.pack(input);
  if (packed.empty()) throw DataError("no rows to benchmark");
  const std::size_t n = std::min<std::size_t>(packed.size(), 5000);
  const int reps = std::max(opt.repetitions, static_cast<int>((100 + n - 1) / n));
  const LatencyStats s =
      measure_latency([&](std::size_t i) { return model.tm.predict(packed.literals(i)); }, n, reps);
  const nlohmann::json j = {{"scenario", model.scenario},
                            {"classes", model.class_names.size()},
                            {"clauses_per_class", model.tm.clauses_per_class()},
                            {"literals", model.tm.num_literals()},
                            {"mean_us", s.mean_us},
                            {"p50_us", s.p50_us},
                            {"p99_us", s.p99_us},
                            {"samples", s.samples},
                            {"cpu", s.cpu}};
  std::ostringstream c;
  csv::Writer w(c);
  w.row(std::vector<std::string>{"Model", "mean_us", "p50_us", "p99_us", "samples", "cpu"});
  w.row(std::vector<std::string>{"TM", csv::format_number(s.mean_us), csv::format_number(s.p50_us),
                                 csv::format_number(s.p99_us), std::to_string(s.samples), s.cpu});
  const fs::path dir = fs::path(cfg.output_dir) / "bench";
  fs::create_directories(dir);
  write_text(dir / "bench.json", json_text(j));
  write_text(dir / "bench.csv", c.str());
  return s;
}

}  // namespace tmids::commands
