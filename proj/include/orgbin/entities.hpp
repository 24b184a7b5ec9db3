#pragma once

// Organization mentions, organization-to-bin assignment and gold construction.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "orgbin/common.hpp"
#include "orgbin/corpus.hpp"
#include "orgbin/gold.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::entities {

struct GazetteerEntry {
  std::string canonical_name;
  std::vector<std::string> aliases;
  std::string bin;
};

namespace detail {

inline char fold(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string fold(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = fold(c);
  return out;
}

inline bool is_alnum(char c) { return textprep::detail::is_ascii_alnum(c); }

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Collapses internal whitespace runs to one space and folds case.
inline std::string alias_key(std::string_view alias) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(alias)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(fold(c));
  }
  return out;
}

// RFC 4180-style split of one CSV line.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw DataError("gazetteer line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace detail

class Gazetteer {
 public:
  Gazetteer() = default;

  explicit Gazetteer(std::vector<GazetteerEntry> entries) {
    for (auto& e : entries) add(std::move(e));
  }

  // The canonical name is always matched as an alias of itself.
  void add(GazetteerEntry entry) {
    entry.canonical_name = detail::trim(entry.canonical_name);
    entry.bin = detail::trim(entry.bin);
    if (entry.canonical_name.empty()) throw DataError("gazetteer: empty canonical name");
    if (entry.bin.empty())
      throw DataError("gazetteer: entry '" + entry.canonical_name + "' has no bin");
    const std::string canon_key = detail::alias_key(entry.canonical_name);
    if (by_canonical_.count(canon_key))
      throw DataError("gazetteer: duplicate canonical name '" + entry.canonical_name + "'");
    const std::size_t idx = entries_.size();
    std::vector<std::string> keys{canon_key};
    for (const auto& a : entry.aliases) {
      auto k = detail::alias_key(a);
      if (!k.empty()) keys.push_back(std::move(k));
    }
    for (const auto& k : keys) {
      auto it = by_alias_.find(k);
      if (it != by_alias_.end() && it->second != idx) {
        throw DataError("gazetteer: alias '" + k + "' maps to both '" +
                        entries_[it->second].canonical_name + "' and '" +
                        entry.canonical_name + "'");
      }
      by_alias_[k] = idx;
    }
    by_canonical_[canon_key] = idx;
    entries_.push_back(std::move(entry));
    rebuild_first_char_index();
  }

  const std::vector<GazetteerEntry>& entries() const { return entries_; }

  const GazetteerEntry* find_canonical(std::string_view name) const {
    auto it = by_canonical_.find(detail::alias_key(name));
    return it == by_canonical_.end() ? nullptr : &entries_[it->second];
  }

  std::optional<std::string> bin_of(std::string_view canonical) const {
    const auto* e = find_canonical(canonical);
    if (!e) return std::nullopt;
    return e->bin;
  }

  // Distinct bins in first-appearance order.
  std::vector<std::string> bins() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
      if (std::find(out.begin(), out.end(), e.bin) == out.end()) out.push_back(e.bin);
    return out;
  }

  struct AliasRef {
    std::string key;
    std::size_t entry;
  };

  // Aliases whose folded form begins with `c`.
  const std::vector<AliasRef>& aliases_starting_with(char c) const {
    static const std::vector<AliasRef> kNone;
    auto it = first_char_.find(detail::fold(c));
    return it == first_char_.end() ? kNone : it->second;
  }

  static Gazetteer from_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read gazetteer " + path.string());
    std::string line;
    std::size_t line_no = 0;
    Gazetteer g;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (detail::trim(line).empty()) continue;
      auto fields = detail::split_csv_line(line, line_no);
      if (!header_seen) {
        if (fields.size() != 3 || detail::trim(fields[0]) != "canonical_name" ||
            detail::trim(fields[1]) != "aliases" || detail::trim(fields[2]) != "bin") {
          throw DataError("gazetteer " + path.string() +
                          ": header must be canonical_name,aliases,bin");
        }
        header_seen = true;
        continue;
      }
      if (fields.size() != 3) {
        throw DataError("gazetteer " + path.string() + " line " + std::to_string(line_no) +
                        ": expected 3 fields");
      }
      GazetteerEntry e{fields[0], {}, fields[2]};
      std::string_view aliases = fields[1];
      std::size_t pos = 0;
      while (pos <= aliases.size()) {
        auto semi = aliases.find(';', pos);
        auto part = aliases.substr(pos, semi == std::string_view::npos ? std::string_view::npos
                                                                       : semi - pos);
        auto alias = detail::trim(part);
        if (!alias.empty()) e.aliases.push_back(alias);
        if (semi == std::string_view::npos) break;
        pos = semi + 1;
      }
      try {
        g.add(std::move(e));
      } catch (const DataError& err) {
        throw DataError(path.string() + " line " + std::to_string(line_no) + ": " + err.what());
      }
    }
    if (!header_seen) throw DataError("gazetteer " + path.string() + " is empty");
    return g;
  }

  // Organizations named for each of the five bins, plus Netflix (Software).
  static Gazetteer starter() {
    return Gazetteer({
        {"MySQL", {}, "Databases"},
        {"RethinkDB", {}, "Databases"},
        {"GenieDB", {}, "Databases"},
        {"Google", {}, "Software"},
        {"Oracle", {}, "Software"},
        {"Netflix", {}, "Software"},
        {"Mozilla", {}, "Open Source"},
        {"Mapbox", {}, "Open Source"},
        {"RockYou", {}, "Mobile"},
        {"Showbucks", {}, "Mobile"},
        {"Verizon", {}, "Mobile"},
        {"Twitch", {}, "Video Games"},
        {"Oculus", {}, "Video Games"},
        {"Zynga", {}, "Video Games"},
    });
  }

 private:
  void rebuild_first_char_index() {
    first_char_.clear();
    for (const auto& [key, idx] : by_alias_) first_char_[key.front()].push_back({key, idx});
  }

  std::vector<GazetteerEntry> entries_;
  std::map<std::string, std::size_t> by_canonical_;
  std::map<std::string, std::size_t> by_alias_;
  std::unordered_map<char, std::vector<AliasRef>> first_char_;
};

struct OrgMention {
  std::string canonical_name;
  std::string surface;
  std::size_t start = 0;  // byte offset
  std::size_t end = 0;    // one past the last byte
  corpus::PostKey post;

  bool operator==(const OrgMention&) const = default;

  nlohmann::json to_json() const {
    return {{"forum", post.forum}, {"post_id", post.post_id}, {"canonical_name", canonical_name},
            {"surface", surface},  {"start", start},          {"end", end}};
  }
};

// Text -> mentions. The gazetteer matcher is the shipped implementation; a
// statistical recognizer can be slotted in behind the same interface.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual std::vector<OrgMention> recognize(std::string_view text) const = 0;
};

namespace detail {

// Length of the match of `key` (folded, single-spaced) at text[pos], or 0.
// A space in the key matches one run of whitespace in the text.
inline std::size_t match_at(std::string_view text, std::size_t pos, std::string_view key) {
  std::size_t t = pos;
  for (std::size_t k = 0; k < key.size(); ++k) {
    if (key[k] == ' ') {
      if (t >= text.size() || !is_space(text[t])) return 0;
      while (t < text.size() && is_space(text[t])) ++t;
      continue;
    }
    if (t >= text.size() || fold(text[t]) != key[k]) return 0;
    ++t;
  }
  return t - pos;
}

inline bool boundary_before(std::string_view text, std::size_t pos) {
  return pos == 0 || !is_alnum(text[pos - 1]) || !is_alnum(text[pos]);
}

inline bool boundary_after(std::string_view text, std::size_t end) {
  return end == text.size() || !is_alnum(text[end]) || !is_alnum(text[end - 1]);
}

}  // namespace detail

class GazetteerRecognizer : public Recognizer {
 public:
  explicit GazetteerRecognizer(const Gazetteer& gazetteer) : gazetteer_(gazetteer) {}

  // Left to right; at each position the longest alias wins; matches never
  // overlap and must sit on alphanumeric/non-alphanumeric transitions.
  std::vector<OrgMention> recognize(std::string_view text) const override {
    std::vector<OrgMention> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t best_len = 0;
      std::size_t best_entry = 0;
      if (detail::boundary_before(text, pos)) {
        for (const auto& alias : gazetteer_.aliases_starting_with(text[pos])) {
          auto len = detail::match_at(text, pos, alias.key);
          if (len > best_len && detail::boundary_after(text, pos + len)) {
            best_len = len;
            best_entry = alias.entry;
          }
        }
      }
      if (best_len == 0) {
        ++pos;
        continue;
      }
      OrgMention m;
      m.canonical_name = gazetteer_.entries()[best_entry].canonical_name;
      m.surface = std::string(text.substr(pos, best_len));
      m.start = pos;
      m.end = pos + best_len;
      out.push_back(std::move(m));
      pos += best_len;
    }
    return out;
  }

 private:
  const Gazetteer& gazetteer_;
};

inline std::vector<OrgMention> extract_orgs(std::string_view text, const Gazetteer& gazetteer) {
  return GazetteerRecognizer(gazetteer).recognize(text);
}

using BinCounts = std::map<std::string, std::size_t>;

// Every gazetteer bin appears in the result, with zero when unmentioned.
inline BinCounts assign_bins(const std::vector<OrgMention>& mentions, const Gazetteer& gazetteer) {
  BinCounts counts;
  for (const auto& b : gazetteer.bins()) counts[b] = 0;
  for (const auto& m : mentions) {
    auto bin = gazetteer.bin_of(m.canonical_name);
    if (!bin) throw DataError("assign_bins: unknown organization '" + m.canonical_name + "'");
    ++counts[*bin];
  }
  return counts;
}

// Keeps bins with at least `min_mentions` mentions.
inline BinCounts prune_bins(const BinCounts& counts, std::size_t min_mentions = 100) {
  BinCounts out;
  for (const auto& [bin, n] : counts)
    if (n >= min_mentions) out.emplace(bin, n);
  return out;
}

// Prose fields a post's mentions are drawn from. Source code is excluded so
// the classifier input never carries its own label.
inline std::string mention_text(const corpus::ForumPost& post) {
  return post.title + "\n" + post.description + "\n" + post.discussion;
}

inline std::vector<OrgMention> post_mentions(const corpus::ForumPost& post,
                                             const Recognizer& recognizer) {
  auto mentions = recognizer.recognize(mention_text(post));
  for (auto& m : mentions) m.post = post.key();
  return mentions;
}

// All mentions across the store, ordered by (forum, post_id, span).
inline std::vector<OrgMention> extract_store(const corpus::CorpusStore& store,
                                             const Gazetteer& gazetteer) {
  GazetteerRecognizer rec(gazetteer);
  std::vector<OrgMention> all;
  for (const auto& p : store.posts()) {
    auto ms = post_mentions(p, rec);
    all.insert(all.end(), ms.begin(), ms.end());
  }
  std::stable_sort(all.begin(), all.end(), [](const OrgMention& a, const OrgMention& b) {
    return std::tie(a.post, a.start) < std::tie(b.post, b.start);
  });
  return all;
}

// Majority bin among the mentions that fall in `retained`; ties go to the bin
// mentioned first.
inline std::optional<std::string> majority_bin(const std::vector<OrgMention>& mentions,
                                               const Gazetteer& gazetteer,
                                               const gold::BinSet& retained) {
  std::map<std::string, std::size_t> count;
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    auto bin = gazetteer.bin_of(mentions[i].canonical_name);
    if (!bin || !retained.contains(*bin)) continue;
    ++count[*bin];
    first_seen.emplace(*bin, i);
  }
  std::optional<std::string> best;
  for (const auto& [bin, n] : count) {
    if (!best || n > count[*best] || (n == count[*best] && first_seen[bin] < first_seen[*best]))
      best = bin;
  }
  return best;
}

// One record per post with source code whose prose mentions a retained bin.
// Record ids are "<forum>/<post_id>"; tokens are the normalized source code.
inline std::vector<gold::GoldRecord> build_gold_records(const corpus::CorpusStore& store,
                                                        const Gazetteer& gazetteer,
                                                        const gold::BinSet& retained) {
  if (retained.empty()) throw ConfigError("build_gold: retained bin set is empty");
  GazetteerRecognizer rec(gazetteer);
  std::vector<const corpus::ForumPost*> posts;
  for (const auto& p : store.posts()) posts.push_back(&p);
  std::stable_sort(posts.begin(), posts.end(),
                   [](const auto* a, const auto* b) { return a->key() < b->key(); });
  std::vector<gold::GoldRecord> out;
  for (const auto* p : posts) {
    if (p->source_code.empty()) continue;
    auto bin = majority_bin(post_mentions(*p, rec), gazetteer, retained);
    if (!bin) continue;
    auto tokens = textprep::normalize(p->source_code);
    if (tokens.empty()) continue;
    out.push_back({p->forum + "/" + p->post_id, std::move(tokens), *bin, p->key()});
  }
  if (out.empty()) log::warn("build_gold: no post produced a gold record");
  return out;
}

inline gold::GoldDataset build_gold(const corpus::CorpusStore& store, const Gazetteer& gazetteer,
                                    const gold::BinSet& retained) {
  auto records = build_gold_records(store, gazetteer, retained);
  return gold::make_dataset(std::move(records), retained);
}

}  // namespace orgbin::entities
