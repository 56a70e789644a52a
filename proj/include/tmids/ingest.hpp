#pragma once

// Scenario schemas and CSV loading for CICIoMT24-style flow-feature files.
//
// A ScenarioSpec lists the canonical feature names (in model order), the class
// names (index order), known extra columns to ignore, header aliases, and
// ordered label rules that map file stems or label strings onto classes.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmids/csv.hpp"
#include "tmids/error.hpp"
#include "tmids/rng.hpp"
#include "tmids/table.hpp"

namespace tmids {

struct LabelRule {
  std::string prefix;  // lower-case prefix of a label string or file stem
  std::string label;   // class name it maps to

  bool operator==(const LabelRule&) const = default;
};

struct ScenarioSpec {
  std::string id;
  std::string description;
  std::vector<std::string> features;
  std::vector<std::string> classes;
  std::vector<std::string> ignored_columns;
  std::map<std::string, std::string> column_aliases;  // dataset header -> canonical name
  std::vector<LabelRule> label_rules;

  int class_index(const std::string& name) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == name) return static_cast<int>(i);
    return -1;
  }

  void validate() const {
    if (features.empty()) throw DataError("scenario " + id + " has no features");
    if (classes.size() < 2) throw DataError("scenario " + id + " needs at least two classes");
    std::set<std::string> seen(features.begin(), features.end());
    if (seen.size() != features.size()) throw DataError("scenario " + id + " repeats a feature name");
  }

  nlohmann::json to_json() const {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : label_rules) rules.push_back({{"prefix", r.prefix}, {"label", r.label}});
    return {{"format", "tmids-scenario"},
            {"version", 1},
            {"id", id},
            {"description", description},
            {"features", features},
            {"classes", classes},
            {"ignored_columns", ignored_columns},
            {"column_aliases", column_aliases},
            {"label_rules", rules}};
  }

  static ScenarioSpec from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "tmids-scenario") throw DataError("not a scenario manifest");
    ScenarioSpec s;
    s.id = j.at("id").get<std::string>();
    s.description = j.value("description", "");
    s.features = j.at("features").get<std::vector<std::string>>();
    s.classes = j.at("classes").get<std::vector<std::string>>();
    s.ignored_columns = j.value("ignored_columns", std::vector<std::string>{});
    s.column_aliases = j.value("column_aliases", std::map<std::string, std::string>{});
    for (const auto& r : j.value("label_rules", nlohmann::json::array()))
      s.label_rules.push_back({r.at("prefix").get<std::string>(), r.at("label").get<std::string>()});
    s.validate();
    return s;
  }

  bool operator==(const ScenarioSpec&) const = default;
};

// Bluetooth protocol schema (27 features, Benign vs DoS).
inline ScenarioSpec bluetooth_spec() {
  ScenarioSpec s;
  s.id = "S1";
  s.description = "Bluetooth: binary Benign vs DoS";
  s.features = {"Header_Length",
                "Protocol_Type",
                "Packet_Type",
                "Rate",
                "HCI_Command",
                "HCI_Event",
                "HCI_ACL_Data",
                "HCI_SCO_Data",
                "Command_Complete",
                "Command_Status",
                "LE_Meta",
                "Connection_Complete",
                "Disconnection_Complete",
                "Inquiry_Complete",
                "Advertising_Report",
                "Read_Remote_Features",
                "Encryption_Change",
                "Number_Completed_Packets",
                "Tot_sum",
                "Min",
                "Max",
                "AVG",
                "Std",
                "Tot_size",
                "IAT",
                "Number",
                "Variance"};
  s.classes = {"Benign", "DoS"};
  s.label_rules = {{"bluetooth_benign", "Benign"}, {"bluetooth_dos", "DoS"}, {"benign", "Benign"},
                   {"dos", "DoS"}};
  return s;
}

// MQTT and Wi-Fi protocol schema (38 features, six classes).
inline ScenarioSpec wifi_mqtt_spec() {
  ScenarioSpec s;
  s.id = "S2";
  s.description = "MQTT and Wi-Fi: six-class";
  s.features = {"Header_Length",   "Protocol_Type",   "Time_To_Live",    "fin_flag_number",
                "syn_flag_number", "rst_flag_number", "psh_flag_number", "ack_flag_number",
                "ece_flag_number", "cwr_flag_number", "ack_count",       "syn_count",
                "fin_count",       "rst_count",       "HTTP",            "HTTPS",
                "DNS",             "Telnet",          "SMTP",            "SSH",
                "IRC",             "TCP",             "UDP",             "DHCP",
                "ARP",             "ICMP",            "IGMP",            "IPv",
                "LLC",             "Tot_sum",         "Min",             "Max",
                "AVG",             "Std",             "Tot_size",        "IAT",
                "Number",          "Variance"};
  s.classes = {"Benign", "DoS", "DDoS", "Recon", "MQTT", "Spoofing"};
  // Extra columns shipped in the released CSVs but not used by the model.
  s.ignored_columns = {"Rate", "Srate", "Drate", "Magnitue", "Radius", "Covariance", "Weight"};
  s.column_aliases = {{"Duration", "Time_To_Live"}};
  s.label_rules = {{"arp_spoofing", "Spoofing"}, {"spoofing", "Spoofing"}, {"mqtt", "MQTT"},
                   {"recon", "Recon"},           {"tcp_ip-ddos", "DDoS"},   {"tcp_ip-dos", "DoS"},
                   {"ddos", "DDoS"},             {"dos", "DoS"},            {"benign", "Benign"}};
  return s;
}

// Order-preserving intersection (order of `a`).
inline std::vector<std::string> common_features(const ScenarioSpec& a, const ScenarioSpec& b) {
  const std::set<std::string> in_b(b.features.begin(), b.features.end());
  std::vector<std::string> out;
  for (const auto& f : a.features)
    if (in_b.count(f)) out.push_back(f);
  if (out.empty()) throw DataError("scenarios " + a.id + " and " + b.id + " share no features");
  return out;
}

// All-protocol schema: shared features, the Wi-Fi/MQTT classes plus the
// Bluetooth DoS attack as DoS_bt.
inline ScenarioSpec combined_spec(const ScenarioSpec& bluetooth, const ScenarioSpec& wifi) {
  ScenarioSpec s;
  s.id = "S3";
  s.description = "All protocols: seven-class on shared features";
  s.features = common_features(bluetooth, wifi);
  s.classes = wifi.classes;
  s.classes.push_back("DoS_bt");
  return s;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Case-insensitive, spaces and dashes treated as underscores.
inline std::string header_key(std::string_view s) {
  std::string out = lower(std::string(csv::trim(s)));
  for (auto& c : out)
    if (c == ' ' || c == '-') c = '_';
  return out;
}

inline std::string file_stem(const std::string& path) {
  std::string name = std::filesystem::path(path).filename().string();
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace detail

// Maps a label string (or file stem) onto a class index, or -1.
inline int resolve_label(const ScenarioSpec& spec, std::string_view raw) {
  const std::string key = detail::lower(std::string(csv::trim(raw)));
  for (std::size_t i = 0; i < spec.classes.size(); ++i)
    if (detail::lower(spec.classes[i]) == key) return static_cast<int>(i);
  for (const auto& rule : spec.label_rules)
    if (key.rfind(detail::lower(rule.prefix), 0) == 0) return spec.class_index(rule.label);
  return -1;
}

// Loads one CSV. Columns are reordered to spec order; ignored columns are
// dropped; any other unknown column, or a missing one, is a schema error.
// Labels come from a "label" column when present, otherwise from the file
// name. Unparsable numeric cells become NaN for clean() to drop. With
// `require_labels` false, unresolvable labels read as class 0 (for inputs
// that are only being predicted).
inline FlowTable load_csv(const std::string& path, const ScenarioSpec& spec, bool require_labels = true) {
  const auto doc = csv::parse(csv::read_file(path));
  if (doc.header.empty() || (doc.header.size() == 1 && doc.header[0].empty()))
    throw DataError("'" + path + "' has no header row");

  std::map<std::string, std::size_t> wanted;  // header key -> feature index
  for (std::size_t i = 0; i < spec.features.size(); ++i) wanted[detail::header_key(spec.features[i])] = i;
  std::set<std::string> ignored;
  for (const auto& c : spec.ignored_columns) ignored.insert(detail::header_key(c));
  std::map<std::string, std::string> aliases;
  for (const auto& [from, to] : spec.column_aliases) aliases[detail::header_key(from)] = detail::header_key(to);

  std::vector<int> source(spec.features.size(), -1);  // feature -> csv column
  std::optional<std::size_t> label_col;
  std::vector<std::string> extra;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    std::string key = detail::header_key(doc.header[c]);
    if (key == "label" || key == "class") {
      label_col = c;
      continue;
    }
    if (auto a = aliases.find(key); a != aliases.end() && !wanted.count(key)) key = a->second;
    if (auto w = wanted.find(key); w != wanted.end()) {
      if (source[w->second] >= 0) throw DataError("'" + path + "' repeats column '" + doc.header[c] + "'");
      source[w->second] = static_cast<int>(c);
    } else if (!ignored.count(key)) {
      extra.push_back(std::string(csv::trim(doc.header[c])));
    }
  }
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < source.size(); ++i)
    if (source[i] < 0) missing.push_back(spec.features[i]);
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "'" + path + "' does not match scenario " + spec.id + " schema;";
    if (!missing.empty()) {
      msg += " missing:";
      for (const auto& m : missing) msg += " " + m;
    }
    if (!extra.empty()) {
      msg += (missing.empty() ? "" : ";");
      msg += " unexpected:";
      for (const auto& e : extra) msg += " " + e;
    }
    throw DataError(msg);
  }

  int file_label = -1;
  if (!label_col) {
    file_label = resolve_label(spec, detail::file_stem(path));
    if (file_label < 0 && !require_labels) file_label = 0;
    if (file_label < 0)
      throw DataError("cannot infer a " + spec.id + " class from file name '" + path +
                      "' and it has no label column");
  }

  FlowTable t;
  t.columns = spec.features;
  t.class_names = spec.classes;
  t.scenario = spec.id;
  t.values.reserve(doc.rows.size() * spec.features.size());
  std::vector<double> row(spec.features.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& rec = doc.rows[r];
    for (std::size_t i = 0; i < source.size(); ++i) {
      const auto c = static_cast<std::size_t>(source[i]);
      row[i] = c < rec.size() ? csv::parse_number(rec[c]) : std::numeric_limits<double>::quiet_NaN();
    }
    int label = file_label;
    if (label_col) {
      const std::string raw = *label_col < rec.size() ? rec[*label_col] : std::string();
      label = resolve_label(spec, raw);
      if (label < 0 && !require_labels) label = 0;
      if (label < 0)
        throw DataError("'" + path + "' row " + std::to_string(r + 2) + ": unknown label '" + raw +
                        "' for scenario " + spec.id);
    }
    t.add_row(row, label);
  }
  return t;
}

// Appends rows of `src` (same columns and class list) to `dst`.
inline void append_rows(FlowTable& dst, const FlowTable& src) {
  if (dst.columns != src.columns || dst.class_names != src.class_names)
    throw DimensionError("cannot concatenate tables with different schemas");
  dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
}

// Re-expresses `t` in `target`'s column subset and class list. `relabel`
// renames source classes first (e.g. DoS -> DoS_bt).
inline FlowTable project(const FlowTable& t, const ScenarioSpec& target,
                         const std::map<std::string, std::string>& relabel = {}) {
  std::vector<std::size_t> cols;
  for (const auto& f : target.features) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), f);
    if (it == t.columns.end()) throw DimensionError("table lacks feature '" + f + "' of scenario " + target.id);
    cols.push_back(static_cast<std::size_t>(it - t.columns.begin()));
  }
  std::vector<int> class_map(t.class_names.size());
  for (std::size_t c = 0; c < t.class_names.size(); ++c) {
    std::string name = t.class_names[c];
    if (auto r = relabel.find(name); r != relabel.end()) name = r->second;
    class_map[c] = target.class_index(name);
    if (class_map[c] < 0) throw DataError("class '" + name + "' is not part of scenario " + target.id);
  }
  FlowTable out;
  out.columns = target.features;
  out.class_names = target.classes;
  out.scenario = target.id;
  std::vector<double> row(cols.size());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) row[i] = t.at(r, cols[i]);
    out.add_row(row, class_map[static_cast<std::size_t>(t.labels[r])]);
  }
  return out;
}

// Per class, keeps round(fraction * n_c) rows (at least min(n_c, 2)), chosen
// with `rng`; surviving rows keep their original order.
inline FlowTable stratified_subsample(const FlowTable& t, double fraction, Rng& rng) {
  if (!(fraction > 0.0) || fraction > 1.0) throw UsageError("subsample fraction must be in (0, 1]");
  if (fraction == 1.0) return t;
  std::vector<std::vector<std::size_t>> by_class(t.class_names.size());
  for (std::size_t r = 0; r < t.rows(); ++r) by_class[static_cast<std::size_t>(t.labels[r])].push_back(r);
  std::vector<std::size_t> keep;
  for (auto& rows : by_class) {
    if (rows.empty()) continue;
    const auto n = rows.size();
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, std::min<std::size_t>(n, 2), n);
    rng.shuffle(rows.begin(), rows.end());
    keep.insert(keep.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(keep.begin(), keep.end());
  return t.select_rows(keep);
}

// Expands directories into their *.csv files (sorted); plain paths pass through.
inline std::vector<std::string> expand_inputs(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : std::filesystem::recursive_directory_iterator(p))
        if (e.is_regular_file() && detail::lower(e.path().extension().string()) == ".csv")
          found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      if (!std::filesystem::exists(p)) throw DataError("input '" + p + "' does not exist");
      out.push_back(p);
    }
  }
  return out;
}

inline FlowTable load_all(const std::vector<std::string>& paths, const ScenarioSpec& spec) {
  const auto files = expand_inputs(paths);
  if (files.empty()) throw DataError("no CSV input files for scenario " + spec.id);
  FlowTable t;
  t.columns = spec.features;
  t.class_names = spec.classes;
  t.scenario = spec.id;
  for (const auto& f : files) append_rows(t, load_csv(f, spec));
  return t;
}

struct SplitFiles {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

struct ScenarioData {
  ScenarioSpec spec;
  FlowTable train;
  FlowTable test;
};

// Loads train/test files for a single-protocol scenario.
inline ScenarioData assemble_scenario(const ScenarioSpec& spec, const SplitFiles& files) {
  spec.validate();
  return {spec, load_all(files.train, spec), load_all(files.test, spec)};
}

// Loads both protocol families and merges them on their shared features,
// renaming the Bluetooth DoS class to DoS_bt.
inline ScenarioData assemble_combined(const ScenarioSpec& bluetooth, const SplitFiles& bt_files,
                                      const ScenarioSpec& wifi, const SplitFiles& wifi_files) {
  const ScenarioSpec spec = combined_spec(bluetooth, wifi);
  const std::map<std::string, std::string> bt_relabel = {{"DoS", "DoS_bt"}};
  auto bt = assemble_scenario(bluetooth, bt_files);
  auto wf = assemble_scenario(wifi, wifi_files);
  ScenarioData out{spec, project(wf.train, spec), project(wf.test, spec)};
  append_rows(out.train, project(bt.train, spec, bt_relabel));
  append_rows(out.test, project(bt.test, spec, bt_relabel));
  return out;
}

}  // namespace tmids
