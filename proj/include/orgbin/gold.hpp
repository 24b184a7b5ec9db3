#pragma once

// Gold-standard records: token sequences paired with an organization bin.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "orgbin/common.hpp"
#include "orgbin/corpus.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::gold {

// Closed, ordered set of bin labels.
class BinSet {
 public:
  BinSet() = default;
  explicit BinSet(std::vector<std::string> names) : names_(std::move(names)) {
    std::set<std::string> seen;
    for (const auto& n : names_) {
      if (n.empty()) throw ConfigError("bin names must be non-empty");
      if (!seen.insert(n).second) throw ConfigError("duplicate bin '" + n + "'");
    }
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  bool contains(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  std::optional<std::size_t> index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

 private:
  std::vector<std::string> names_;
};

// The five organization bins, in descending gold-count order.
inline BinSet default_bins() {
  return BinSet({"Databases", "Software", "Open Source", "Mobile", "Video Games"});
}

struct GoldRecord {
  std::string record_id;
  textprep::TokenSequence tokens;
  std::string bin;
  std::optional<corpus::PostKey> source;

  nlohmann::json to_json() const {
    nlohmann::json j{{"record_id", record_id}, {"tokens", tokens}, {"bin", bin}};
    if (source) {
      j["forum"] = source->forum;
      j["post_id"] = source->post_id;
    }
    return j;
  }
};

struct GoldDataset {
  std::vector<GoldRecord> records;
  // Class names in class-index order: descending record count, ties in
  // declared bin order.
  std::vector<std::string> classes;
  // Class index per record.
  std::vector<std::size_t> labels;
  // Records per class, indexed like `classes`.
  std::vector<std::size_t> counts;
  std::vector<corpus::Rejection> rejections;

  std::size_t size() const { return records.size(); }
  std::size_t num_classes() const { return classes.size(); }

  // Per-class share of records in percent, rounded to two decimals.
  std::vector<double> percentages() const {
    std::vector<double> out;
    for (auto c : counts) {
      double pct = 100.0 * static_cast<double>(c) / static_cast<double>(records.size());
      out.push_back(std::round(pct * 100.0) / 100.0);
    }
    return out;
  }

  std::vector<textprep::TokenSequence> token_sequences() const {
    std::vector<textprep::TokenSequence> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.tokens);
    return out;
  }
};

// Assigns class indices to records already checked against `bins`.
inline GoldDataset make_dataset(std::vector<GoldRecord> records, const BinSet& bins) {
  GoldDataset ds;
  std::vector<std::size_t> declared_counts(bins.size(), 0);
  for (const auto& r : records) {
    auto idx = bins.index_of(r.bin);
    if (!idx) throw DataError("record '" + r.record_id + "' has bin '" + r.bin + "' outside the bin set");
    ++declared_counts[*idx];
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < bins.size(); ++i)
    if (declared_counts[i] > 0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return declared_counts[a] > declared_counts[b];
  });
  std::map<std::string, std::size_t> class_of;
  for (auto i : order) {
    class_of[bins.names()[i]] = ds.classes.size();
    ds.classes.push_back(bins.names()[i]);
    ds.counts.push_back(declared_counts[i]);
  }
  for (const auto& r : records) ds.labels.push_back(class_of.at(r.bin));
  ds.records = std::move(records);
  return ds;
}

// Restricts a dataset to the given record indices, keeping the class order.
inline GoldDataset subset(const GoldDataset& ds, const std::vector<std::size_t>& indices) {
  GoldDataset out;
  out.classes = ds.classes;
  out.counts.assign(ds.classes.size(), 0);
  for (auto i : indices) {
    out.records.push_back(ds.records.at(i));
    out.labels.push_back(ds.labels[i]);
    ++out.counts[ds.labels[i]];
  }
  return out;
}

namespace detail {

inline std::pair<std::optional<GoldRecord>, std::string> parse_record(const std::string& line,
                                                                      const BinSet& bins) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) return {std::nullopt, "invalid JSON"};
  if (!j.is_object()) return {std::nullopt, "record is not a JSON object"};
  GoldRecord r;
  if (!j.contains("record_id") || !j["record_id"].is_string() ||
      j["record_id"].get<std::string>().empty())
    return {std::nullopt, "missing or empty record_id"};
  r.record_id = j["record_id"].get<std::string>();
  if (!j.contains("bin") || !j["bin"].is_string()) return {std::nullopt, "missing bin"};
  r.bin = j["bin"].get<std::string>();
  if (!bins.contains(r.bin)) return {std::nullopt, "unknown bin '" + r.bin + "'"};
  const bool has_tokens = j.contains("tokens");
  const bool has_raw = j.contains("raw_text");
  if (has_tokens == has_raw) return {std::nullopt, "exactly one of tokens or raw_text is required"};
  if (has_tokens) {
    if (!j["tokens"].is_array()) return {std::nullopt, "tokens is not an array"};
    for (const auto& t : j["tokens"]) {
      if (!t.is_string()) return {std::nullopt, "tokens must be strings"};
      r.tokens.push_back(t.get<std::string>());
    }
    if (!textprep::is_normalized(r.tokens))
      return {std::nullopt, "tokens must be non-empty lowercase alphanumeric strings"};
  } else {
    if (!j["raw_text"].is_string()) return {std::nullopt, "raw_text is not a string"};
    r.tokens = textprep::normalize(j["raw_text"].get<std::string>());
  }
  if (r.tokens.empty()) return {std::nullopt, "empty token sequence"};
  const bool has_forum = j.contains("forum");
  const bool has_post = j.contains("post_id");
  if (has_forum || has_post) {
    if (!has_forum || !has_post || !j["forum"].is_string() || !j["post_id"].is_string())
      return {std::nullopt, "source reference needs string forum and post_id"};
    r.source = corpus::PostKey{j["forum"].get<std::string>(), j["post_id"].get<std::string>()};
  }
  return {std::move(r), {}};
}

}  // namespace detail

// Reads a gold-record file. Records with an unknown bin or a bad shape are
// rejected individually; a file without any accepted record is an error.
inline GoldDataset load_gold(const std::filesystem::path& path, const BinSet& bins = default_bins()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read gold file " + path.string());
  std::vector<GoldRecord> records;
  std::vector<corpus::Rejection> rejections;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto [rec, reason] = detail::parse_record(line, bins);
    if (rec && !ids.insert(rec->record_id).second) {
      rec.reset();
      reason = "duplicate record_id";
    }
    if (!rec) {
      rejections.push_back({line_no, reason});
      continue;
    }
    records.push_back(std::move(*rec));
  }
  for (const auto& r : rejections)
    log::warn(path.string() + ":" + std::to_string(r.line_no) + ": rejected gold record: " + r.reason);
  if (records.empty()) throw DataError("gold file " + path.string() + " has no valid records");
  auto ds = make_dataset(std::move(records), bins);
  ds.rejections = std::move(rejections);
  return ds;
}

inline void write_gold(const std::filesystem::path& path, const std::vector<GoldRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write gold file " + path.string());
  for (const auto& r : records) out << r.to_json().dump() << '\n';
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

}  // namespace orgbin::gold
