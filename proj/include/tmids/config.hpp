#pragma once

// Run configuration, stored as JSON. Machine parameters use the names of the
// reference tooling (number_of_clauses, T, s, ...). Presets per scenario:
//
//   S1  number_of_clauses=100  T=10  s=2  epochs=10
//   S2  number_of_clauses=100  T=10  s=5  epochs=15
//   S3  number_of_clauses=120  T=15  s=2  epochs=15
//
// all with n_bins=5, onehot-dense quantile binning, unweighted clauses.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmids/error.hpp"
#include "tmids/ingest.hpp"
#include "tmids/metrics.hpp"
#include "tmids/tsetlin.hpp"

namespace tmids {

struct RunConfig {
  std::string scenario = "S1";
  std::map<std::string, SplitFiles> data;  // "S1" / "S2" -> train and test inputs
  std::string manifest_dir;                // optional scenario manifest overrides

  std::string model = "tm";  // tm | majority
  int number_of_clauses = 100;
  std::string clause_budget = "per_class";  // per_class | total
  int threshold = 10;
  double specificity = 2.0;
  bool weighted_clauses = false;
  int epochs = 10;
  int n_bins = 5;
  std::string encode = "onehot-dense";
  std::string strategy = "quantile";
  int states_per_action = 128;
  bool smote = true;
  int smote_k = 5;

  std::uint64_t seed = 42;
  double subsample = 1.0;
  std::string averaging = "macro";
  int folds = 5;
  int threads = 1;
  std::string output_dir = "out";

  static RunConfig preset(const std::string& scenario) {
    RunConfig c;
    c.scenario = scenario;
    if (scenario == "S1") {
      c.number_of_clauses = 100, c.threshold = 10, c.specificity = 2.0, c.epochs = 10;
    } else if (scenario == "S2") {
      c.number_of_clauses = 100, c.threshold = 10, c.specificity = 5.0, c.epochs = 15;
    } else if (scenario == "S3") {
      c.number_of_clauses = 120, c.threshold = 15, c.specificity = 2.0, c.epochs = 15;
    } else {
      throw UsageError("unknown scenario '" + scenario + "' (expected S1, S2 or S3)");
    }
    return c;
  }

  int clauses_per_class(int num_classes) const {
    if (clause_budget == "per_class") return number_of_clauses;
    const int m = number_of_clauses / num_classes;
    if (m < 2 || m % 2 != 0 || m * num_classes != number_of_clauses)
      throw UsageError("number_of_clauses=" + std::to_string(number_of_clauses) +
                       " cannot be split into an even per-class count over " + std::to_string(num_classes) +
                       " classes");
    return m;
  }

  TsetlinParams machine_params(int num_classes) const {
    TsetlinParams p;
    p.num_classes = num_classes;
    p.clauses_per_class = clauses_per_class(num_classes);
    p.threshold = threshold;
    p.specificity = specificity;
    p.states_per_action = states_per_action;
    p.seed = seed;
    return p;
  }

  void validate() const {
    if (scenario != "S1" && scenario != "S2" && scenario != "S3")
      throw UsageError("scenario must be S1, S2 or S3, got '" + scenario + "'");
    if (model != "tm" && model != "majority") throw UsageError("model must be 'tm' or 'majority'");
    if (clause_budget != "per_class" && clause_budget != "total")
      throw UsageError("clause_budget must be 'per_class' or 'total'");
    if (number_of_clauses < 2 || number_of_clauses % 2 != 0)
      throw UsageError("number_of_clauses must be a positive even number");
    if (threshold < 1) throw UsageError("T must be >= 1");
    if (!(specificity > 1.0) || !std::isfinite(specificity)) throw UsageError("s must be > 1");
    if (weighted_clauses) throw UsageError("weighted_clauses=true is not supported");
    if (epochs < 0) throw UsageError("epochs must be >= 0");
    if (n_bins < 2) throw UsageError("n_bins must be >= 2");
    if (encode != "onehot-dense") throw UsageError("only encode=onehot-dense is supported");
    if (strategy != "quantile") throw UsageError("only strategy=quantile is supported");
    if (states_per_action < 1 || states_per_action > 128)
      throw UsageError("states_per_action must be in [1, 128]");
    if (smote_k < 1) throw UsageError("smote_k must be >= 1");
    if (!(subsample > 0.0) || subsample > 1.0) throw UsageError("subsample must be in (0, 1]");
    parse_averaging(averaging);
    if (folds < 2) throw UsageError("folds must be >= 2");
    if (threads < 1) throw UsageError("threads must be >= 1");
    if (output_dir.empty()) throw UsageError("output_dir must not be empty");
  }

  nlohmann::json to_json() const {
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [k, v] : data) d[k] = {{"train", v.train}, {"test", v.test}};
    return {{"scenario", scenario},
            {"data", d},
            {"manifest_dir", manifest_dir},
            {"model", model},
            {"number_of_clauses", number_of_clauses},
            {"clause_budget", clause_budget},
            {"T", threshold},
            {"s", specificity},
            {"weighted_clauses", weighted_clauses},
            {"epochs", epochs},
            {"n_bins", n_bins},
            {"encode", encode},
            {"strategy", strategy},
            {"states_per_action", states_per_action},
            {"smote", smote},
            {"smote_k", smote_k},
            {"seed", seed},
            {"subsample", subsample},
            {"averaging", averaging},
            {"folds", folds},
            {"threads", threads},
            {"output_dir", output_dir}};
  }

  // Keys absent from `j` keep the scenario preset.
  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c = preset(j.value("scenario", std::string("S1")));
    if (j.contains("data"))
      for (const auto& [k, v] : j.at("data").items())
        c.data[k] = {v.value("train", std::vector<std::string>{}), v.value("test", std::vector<std::string>{})};
    c.manifest_dir = j.value("manifest_dir", c.manifest_dir);
    c.model = j.value("model", c.model);
    c.number_of_clauses = j.value("number_of_clauses", c.number_of_clauses);
    c.clause_budget = j.value("clause_budget", c.clause_budget);
    c.threshold = j.value("T", c.threshold);
    c.specificity = j.value("s", c.specificity);
    c.weighted_clauses = j.value("weighted_clauses", c.weighted_clauses);
    c.epochs = j.value("epochs", c.epochs);
    c.n_bins = j.value("n_bins", c.n_bins);
    c.encode = j.value("encode", c.encode);
    c.strategy = j.value("strategy", c.strategy);
    c.states_per_action = j.value("states_per_action", c.states_per_action);
    c.smote = j.value("smote", c.smote);
    c.smote_k = j.value("smote_k", c.smote_k);
    c.seed = j.value("seed", c.seed);
    c.subsample = j.value("subsample", c.subsample);
    c.averaging = j.value("averaging", c.averaging);
    c.folds = j.value("folds", c.folds);
    c.threads = j.value("threads", c.threads);
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config file '" + path + "': " + e.what());
    }
  }

  bool operator==(const RunConfig& o) const { return to_json() == o.to_json(); }
};

}  // namespace tmids
