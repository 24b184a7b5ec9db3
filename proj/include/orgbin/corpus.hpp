#pragma once

// File-backed store of forum posts with incremental, duplicate-free ingestion.
//
// A store is a directory holding
//   posts.jsonl  append-only log, one ForumPost per line
//   seen.jsonl   side index, one [forum, post_id] key per line
// Both files are only ever appended to, so re-ingesting known posts leaves
// them byte-identical.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orgbin/common.hpp"

namespace orgbin::corpus {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

namespace detail {

inline bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[static_cast<std::size_t>(m - 1)];
}

inline std::optional<int> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

inline std::optional<int> month_from_abbrev(std::string_view s) {
  static constexpr std::array<std::string_view, 12> kNames{
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  if (s.size() != 3) return std::nullopt;
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (lower == kNames[i]) return static_cast<int>(i) + 1;
  return std::nullopt;
}

}  // namespace detail

// Accepts "DD-MMM-YY" (e.g. 26-Sep-19) and ISO "YYYY-MM-DD". Two-digit years
// below 70 land in 2000-2069, the rest in 1970-1999.
inline std::optional<Date> parse_date(std::string_view s) {
  Date d;
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    auto y = detail::parse_digits(s.substr(0, 4));
    auto m = detail::parse_digits(s.substr(5, 2));
    auto dd = detail::parse_digits(s.substr(8, 2));
    if (!y || !m || !dd) return std::nullopt;
    d = {*y, *m, *dd};
  } else if ((s.size() == 9 || s.size() == 8) && s[s.size() - 3] == '-') {
    const std::size_t dash1 = s.find('-');
    if (dash1 == 0 || dash1 > 2 || dash1 + 4 != s.size() - 3) return std::nullopt;
    auto dd = detail::parse_digits(s.substr(0, dash1));
    auto m = detail::month_from_abbrev(s.substr(dash1 + 1, 3));
    auto yy = detail::parse_digits(s.substr(s.size() - 2));
    if (!dd || !m || !yy) return std::nullopt;
    d = {*yy < 70 ? 2000 + *yy : 1900 + *yy, *m, *dd};
  } else {
    return std::nullopt;
  }
  if (d.month < 1 || d.month > 12) return std::nullopt;
  if (d.day < 1 || d.day > detail::days_in_month(d.year, d.month)) return std::nullopt;
  return d;
}

struct PostKey {
  std::string forum;
  std::string post_id;

  auto operator<=>(const PostKey&) const = default;
};

struct ForumPost {
  std::string post_id;
  std::string forum;
  std::string language;
  std::string title;
  Date date;
  std::string author;
  std::string author_reputation;
  std::string description;
  std::string source_code;
  std::string discussion;

  PostKey key() const { return {forum, post_id}; }

  bool operator==(const ForumPost&) const = default;

  nlohmann::json to_json() const {
    return nlohmann::json{{"post_id", post_id},
                          {"forum", forum},
                          {"language", language},
                          {"title", title},
                          {"date", date.iso()},
                          {"author", author},
                          {"author_reputation", author_reputation},
                          {"description", description},
                          {"source_code", source_code},
                          {"discussion", discussion}};
  }
};

inline constexpr std::array<std::string_view, 10> kPostFields{
    "post_id", "forum",       "language",    "title",      "date",
    "author",  "author_reputation", "description", "source_code", "discussion"};

// Validates one dump record; returns the post or the rejection reason.
inline std::pair<std::optional<ForumPost>, std::string> parse_post(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return {std::nullopt, "invalid JSON"};
  if (!j.is_object()) return {std::nullopt, "record is not a JSON object"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(kPostFields.begin(), kPostFields.end(), it.key()) == kPostFields.end())
      return {std::nullopt, "unexpected key '" + it.key() + "'"};
  }
  std::map<std::string_view, std::string> v;
  for (auto field : kPostFields) {
    auto it = j.find(std::string(field));
    if (it == j.end()) return {std::nullopt, "missing key '" + std::string(field) + "'"};
    if (!it->is_string()) return {std::nullopt, "key '" + std::string(field) + "' is not a string"};
    v[field] = it->get<std::string>();
  }
  if (v["post_id"].empty()) return {std::nullopt, "empty post_id"};
  if (v["forum"].empty()) return {std::nullopt, "empty forum"};
  auto date = parse_date(v["date"]);
  if (!date) return {std::nullopt, "unparseable date '" + v["date"] + "'"};
  ForumPost p{v["post_id"], v["forum"],  v["language"],          v["title"],
              *date,        v["author"], v["author_reputation"], v["description"],
              v["source_code"], v["discussion"]};
  return {std::move(p), {}};
}

struct Rejection {
  std::size_t line_no = 0;
  std::string reason;
};

struct IngestReport {
  std::size_t files_read = 0;
  std::size_t posts_added = 0;
  std::size_t posts_skipped_duplicate = 0;
  std::size_t posts_rejected = 0;
  std::vector<Rejection> rejection_reasons;

  std::size_t records_seen() const {
    return posts_added + posts_skipped_duplicate + posts_rejected;
  }

  IngestReport& operator+=(const IngestReport& o) {
    files_read += o.files_read;
    posts_added += o.posts_added;
    posts_skipped_duplicate += o.posts_skipped_duplicate;
    posts_rejected += o.posts_rejected;
    rejection_reasons.insert(rejection_reasons.end(), o.rejection_reasons.begin(),
                             o.rejection_reasons.end());
    return *this;
  }

  nlohmann::json to_json() const {
    nlohmann::json reasons = nlohmann::json::array();
    for (const auto& r : rejection_reasons)
      reasons.push_back({{"line_no", r.line_no}, {"reason", r.reason}});
    return {{"files_read", files_read},
            {"posts_added", posts_added},
            {"posts_skipped_duplicate", posts_skipped_duplicate},
            {"posts_rejected", posts_rejected},
            {"rejection_reasons", reasons}};
  }
};

class CorpusStore {
 public:
  // Opens the store at `dir`, creating the directory if needed.
  explicit CorpusStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw RuntimeFailure("cannot create store directory " + dir_.string());
    load();
  }

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path posts_path() const { return dir_ / "posts.jsonl"; }
  std::filesystem::path index_path() const { return dir_ / "seen.jsonl"; }

  bool contains(const PostKey& key) const { return index_.count(key) != 0; }

  const std::vector<ForumPost>& posts() const { return posts_; }

  std::size_t size() const { return posts_.size(); }

  const ForumPost* find(const PostKey& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &posts_[it->second];
  }

  // Returns false (and writes nothing) when the key is already present.
  bool append(const ForumPost& post) {
    if (contains(post.key())) return false;
    std::ofstream log(posts_path(), std::ios::binary | std::ios::app);
    std::ofstream idx(index_path(), std::ios::binary | std::ios::app);
    if (!log || !idx) throw RuntimeFailure("cannot append to store " + dir_.string());
    log << post.to_json().dump() << '\n';
    idx << nlohmann::json::array({post.forum, post.post_id}).dump() << '\n';
    if (!log || !idx) throw RuntimeFailure("write failed in store " + dir_.string());
    index_.emplace(post.key(), posts_.size());
    posts_.push_back(post);
    return true;
  }

 private:
  void load() {
    std::ifstream log(posts_path(), std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (log && std::getline(log, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto [post, reason] = parse_post(line);
      if (!post) {
        throw DataError("store " + posts_path().string() + " line " +
                        std::to_string(line_no) + ": " + reason);
      }
      index_.emplace(post->key(), posts_.size());
      posts_.push_back(std::move(*post));
    }
    // The side index must agree with the log; rebuild it if it is missing.
    if (!std::filesystem::exists(index_path())) {
      if (!posts_.empty()) {
        std::ofstream idx(index_path(), std::ios::binary);
        for (const auto& p : posts_)
          idx << nlohmann::json::array({p.forum, p.post_id}).dump() << '\n';
      }
      return;
    }
    std::ifstream idx(index_path(), std::ios::binary);
    std::size_t keys = 0;
    while (std::getline(idx, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_array() || j.size() != 2 || !j[0].is_string() ||
          !j[1].is_string() || !index_.count(PostKey{j[0].get<std::string>(), j[1].get<std::string>()})) {
        throw DataError("store index " + index_path().string() + " disagrees with the post log");
      }
      ++keys;
    }
    if (keys != posts_.size())
      throw DataError("store index " + index_path().string() + " disagrees with the post log");
  }

  std::filesystem::path dir_;
  std::vector<ForumPost> posts_;
  std::map<PostKey, std::size_t> index_;
};

// Reads a line-delimited post dump into the store. Malformed lines are
// reported and skipped; only an unreadable file is fatal.
inline IngestReport ingest_posts(const std::filesystem::path& input, CorpusStore& store) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw DataError("cannot read input file " + input.string());
  IngestReport report;
  report.files_read = 1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto [post, reason] = parse_post(line);
    if (!post) {
      ++report.posts_rejected;
      report.rejection_reasons.push_back({line_no, reason});
      continue;
    }
    if (const ForumPost* existing = store.find(post->key())) {
      ++report.posts_skipped_duplicate;
      if (!(*existing == *post)) {
        log::warn("duplicate key (" + post->forum + ", " + post->post_id +
                  ") with different content at " + input.string() + ":" +
                  std::to_string(line_no) + "; keeping the first copy");
      }
      continue;
    }
    store.append(*post);
    ++report.posts_added;
  }
  if (in.bad()) throw DataError("read error on " + input.string());
  return report;
}

struct ForumStatsRow {
  std::string name;
  std::string language;
  std::size_t post_count = 0;
  std::size_t source_code_count = 0;
};

struct CorpusStats {
  std::vector<ForumStatsRow> rows;
  std::size_t total_posts = 0;
  std::size_t total_source_code = 0;
  std::size_t language_count = 0;

  std::string total_language_label() const {
    return std::to_string(language_count) + (language_count == 1 ? " Language" : " Languages");
  }

  nlohmann::json to_json() const {
    nlohmann::json forums = nlohmann::json::array();
    for (const auto& r : rows) {
      forums.push_back({{"name", r.name},
                        {"language", r.language},
                        {"posts", r.post_count},
                        {"source_code", r.source_code_count}});
    }
    return {{"forums", forums},
            {"total",
             {{"name", "Total"},
              {"language", total_language_label()},
              {"languages", language_count},
              {"posts", total_posts},
              {"source_code", total_source_code}}}};
  }

  std::string to_markdown() const;
};

// 8412832 -> "8,412,832"
inline std::string group_thousands(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

inline std::string CorpusStats::to_markdown() const {
  std::string md = "| Name | Language | Posts | Source Code |\n|---|---|---:|---:|\n";
  for (const auto& r : rows) {
    md += "| " + r.name + " | " + r.language + " | " + group_thousands(r.post_count) + " | " +
          group_thousands(r.source_code_count) + " |\n";
  }
  md += "| Total | " + total_language_label() + " | " + group_thousands(total_posts) + " | " +
        group_thousands(total_source_code) + " |\n";
  return md;
}

namespace detail {

inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

// One row per forum, ordered case-insensitively by name. A forum whose posts
// carry several languages lists them joined by '/'.
inline CorpusStats corpus_stats(const std::vector<ForumPost>& posts) {
  struct Acc {
    std::set<std::string> languages;
    std::size_t posts = 0;
    std::size_t code = 0;
  };
  std::map<std::string, Acc> by_forum;
  std::set<std::string> languages;
  for (const auto& p : posts) {
    auto& acc = by_forum[p.forum];
    acc.languages.insert(p.language);
    ++acc.posts;
    if (!p.source_code.empty()) ++acc.code;
    languages.insert(p.language);
  }
  CorpusStats stats;
  for (auto& [name, acc] : by_forum) {
    std::string lang;
    for (const auto& l : acc.languages) lang += (lang.empty() ? "" : "/") + l;
    stats.rows.push_back({name, lang, acc.posts, acc.code});
    stats.total_posts += acc.posts;
    stats.total_source_code += acc.code;
  }
  std::stable_sort(stats.rows.begin(), stats.rows.end(), [](const auto& a, const auto& b) {
    return detail::fold_case(a.name) < detail::fold_case(b.name);
  });
  stats.language_count = languages.size();
  return stats;
}

inline CorpusStats corpus_stats(const CorpusStore& store) { return corpus_stats(store.posts()); }

}  // namespace orgbin::corpus
