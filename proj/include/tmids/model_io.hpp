#pragma once

// Persisted pipeline model: class map, standardizer, binner, Tsetlin Machine.
//
// File layout (all integers little-endian, doubles as raw IEEE-754 bits):
//
//   "TMIDSMDL"                 8-byte magic
//   u32 version                currently 1
//   str scenario               str = u32 byte length + UTF-8 bytes
//   u32 C, str class_name[C]
//   u32 C, u32 m, u32 T, f64 s, u32 N, u64 seed        machine parameters
//   u32 epochs_trained
//   u32 k, str column[k], f64 mean[k], f64 stddev[k]    standardizer
//   u32 n_bins, u32 k, { str name, u32 e, f64 edge[e] }[k]  binner
//   u32 d, str literal_name[d]
//   u8  state_minus_one[C * m * 2d]    clause-major; literals x_0..x_{d-1}, NOT x_0..NOT x_{d-1}
//   u32 f, f64 firing_frequency[f]    f is 0 or C * m
//   u64 FNV-1a hash of every preceding byte
//
// Saving the same model always produces identical bytes.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tmids/binarizer.hpp"
#include "tmids/error.hpp"
#include "tmids/preprocess.hpp"
#include "tmids/tsetlin.hpp"

namespace tmids {

inline constexpr char kModelMagic[8] = {'T', 'M', 'I', 'D', 'S', 'M', 'D', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace io {

inline std::uint64_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void strings(const std::vector<std::string>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& s : v) str(s);
  }
  void doubles(const std::vector<double>& v) {
    for (double d : v) f64(d);
  }
  const std::vector<std::uint8_t>& buffer() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    const auto b = take(n);
    return std::string(b.begin(), b.end());
  }
  std::vector<std::string> strings() {
    const auto n = u32();
    check_count(n, 4);
    std::vector<std::string> v;
    v.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) v.push_back(str());
    return v;
  }
  std::vector<double> doubles(std::size_t n) {
    check_count(n, 8);
    std::vector<double> v(n);
    for (auto& d : v) d = f64();
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > data_.size() - pos_) throw DataError("model file is truncated");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void check_count(std::size_t n, std::size_t unit) const {
    if (n > (data_.size() - pos_) / unit) throw DataError("model file is truncated");
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace io

struct PipelineModel {
  std::string scenario;
  std::vector<std::string> class_names;
  StandardizerStats standardizer;
  QuantileBinner binner;
  TsetlinModel tm;
  std::uint32_t epochs_trained = 0;
  std::vector<double> firing_frequency;

  std::vector<std::uint8_t> binarize(std::span<const double> raw) const {
    std::vector<double> z(raw.size());
    standardizer.apply_row(raw, z);
    return binner.transform(z);
  }

  // Standardizes and binarizes an unstandardized table.
  PackedDataset pack(const FlowTable& raw) const {
    if (raw.columns != standardizer.columns)
      throw DimensionError("table for scenario " + raw.scenario + " has " + std::to_string(raw.cols()) +
                           " columns that do not match the model's " + scenario + " schema (" +
                           std::to_string(standardizer.columns.size()) + " features)");
    PackedDataset out(static_cast<int>(binner.output_width()));
    std::vector<double> z(raw.cols());
    std::vector<std::uint8_t> bits(binner.output_width());
    for (std::size_t r = 0; r < raw.rows(); ++r) {
      standardizer.apply_row(raw.row(r), z);
      binner.transform_into(z, bits);
      out.add(bits, raw.labels[r]);
    }
    return out;
  }

  std::vector<std::uint8_t> serialize() const {
    io::Writer w;
    w.bytes({reinterpret_cast<const std::uint8_t*>(kModelMagic), sizeof kModelMagic});
    w.u32(kModelVersion);
    w.str(scenario);
    w.strings(class_names);
    const auto& p = tm.params();
    w.u32(static_cast<std::uint32_t>(p.num_classes));
    w.u32(static_cast<std::uint32_t>(p.clauses_per_class));
    w.u32(static_cast<std::uint32_t>(p.threshold));
    w.f64(p.specificity);
    w.u32(static_cast<std::uint32_t>(p.states_per_action));
    w.u64(p.seed);
    w.u32(epochs_trained);
    w.strings(standardizer.columns);
    w.doubles(standardizer.mean);
    w.doubles(standardizer.stddev);
    w.u32(static_cast<std::uint32_t>(binner.n_bins()));
    w.u32(static_cast<std::uint32_t>(binner.num_features()));
    for (std::size_t f = 0; f < binner.num_features(); ++f) {
      w.str(binner.feature_names()[f]);
      w.u32(static_cast<std::uint32_t>(binner.edges()[f].size()));
      w.doubles(binner.edges()[f]);
    }
    w.strings(tm.feature_names());
    w.bytes(tm.raw_states());
    w.u32(static_cast<std::uint32_t>(firing_frequency.size()));
    w.doubles(firing_frequency);
    const auto& buf = w.buffer();
    w.u64(io::fnv1a(buf.data(), buf.size()));
    return w.buffer();
  }

  static PipelineModel deserialize(std::span<const std::uint8_t> data) {
    if (data.size() < sizeof kModelMagic + 12 || std::memcmp(data.data(), kModelMagic, sizeof kModelMagic) != 0)
      throw DataError("not a tmids model file");
    const std::size_t body = data.size() - 8;
    io::Reader tail(data.subspan(body));
    if (tail.u64() != io::fnv1a(data.data(), body)) throw DataError("model file checksum mismatch");

    io::Reader r(data.first(body));
    r.take(sizeof kModelMagic);
    const auto version = r.u32();
    if (version != kModelVersion)
      throw DataError("unsupported model file version " + std::to_string(version));
    PipelineModel m;
    m.scenario = r.str();
    m.class_names = r.strings();
    TsetlinParams p;
    p.num_classes = static_cast<int>(r.u32());
    p.clauses_per_class = static_cast<int>(r.u32());
    p.threshold = static_cast<int>(r.u32());
    p.specificity = r.f64();
    p.states_per_action = static_cast<int>(r.u32());
    p.seed = r.u64();
    m.epochs_trained = r.u32();
    m.standardizer.columns = r.strings();
    m.standardizer.mean = r.doubles(m.standardizer.columns.size());
    m.standardizer.stddev = r.doubles(m.standardizer.columns.size());
    const int n_bins = static_cast<int>(r.u32());
    const auto n_feat = r.u32();
    std::vector<std::string> names;
    std::vector<std::vector<double>> edges;
    for (std::uint32_t f = 0; f < n_feat; ++f) {
      names.push_back(r.str());
      edges.push_back(r.doubles(r.u32()));
    }
    m.binner = QuantileBinner(std::move(names), std::move(edges), n_bins);
    auto literal_names = r.strings();
    if (static_cast<int>(m.class_names.size()) != p.num_classes)
      throw DataError("model class list does not match its class count");
    p.validate();
    const std::size_t n_states =
        static_cast<std::size_t>(p.num_classes) * p.clauses_per_class * 2 * literal_names.size();
    const auto states = r.take(n_states);
    m.tm = TsetlinModel::from_raw(p, std::move(literal_names), states);
    m.firing_frequency = r.doubles(r.u32());
    if (r.remaining() != 0) throw DataError("model file has trailing data");
    if (m.binner.output_width() != static_cast<std::size_t>(m.tm.num_features()))
      throw DataError("model binner width does not match the machine's input width");
    return m;
  }

  void save(const std::string& path) const {
    const auto bytes = serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing model file '" + path + "'");
  }

  static PipelineModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
  }
};

}  // namespace tmids
