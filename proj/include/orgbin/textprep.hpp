#pragma once

// Source-code normalization into fixed-length token id sequences.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "orgbin/common.hpp"

namespace orgbin::textprep {

using TokenSequence = std::vector<std::string>;

inline constexpr std::size_t kDefaultMaxLen = 200;
inline constexpr std::size_t kDefaultMinFreq = 2;

namespace detail {

inline bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool has_vowel(std::string_view s) {
  return s.find_first_of("aeiou") != std::string_view::npos;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// One pass of the ordered rule table; the first rule that fires wins.
inline bool apply_first_rule(std::string& t) {
  const std::size_t n = t.size();
  if (n > 4 && ends_with(t, "ies")) {
    t.replace(n - 3, 3, "y");
    return true;
  }
  if (ends_with(t, "sses")) {
    t.erase(n - 2);
    return true;
  }
  if (n > 5 && ends_with(t, "ing") && has_vowel(std::string_view(t).substr(0, n - 3))) {
    t.erase(n - 3);
    return true;
  }
  if (n > 4 && ends_with(t, "ed") && has_vowel(std::string_view(t).substr(0, n - 2))) {
    t.erase(n - 2);
    return true;
  }
  if (n > 3 && ends_with(t, "s") && !ends_with(t, "ss") && !ends_with(t, "us") &&
      !ends_with(t, "is")) {
    t.erase(n - 1);
    return true;
  }
  return false;
}

}  // namespace detail

// Suffix-rule lemmatizer. Rules, in order:
//   -ies  -> -y   (length > 4)
//   -sses -> -ss
//   -ing  -> ""   (length > 5, stem keeps a vowel)
//   -ed   -> ""   (length > 4, stem keeps a vowel)
//   -s    -> ""   (length > 3, not -ss / -us / -is)
// The table is reapplied until no rule fires, so lemmatize(lemmatize(t)) ==
// lemmatize(t). Every rule shortens the token and none can empty it.
inline std::string lemmatize(std::string_view token) {
  std::string t(token);
  while (detail::apply_first_rule(t)) {
  }
  return t;
}

// Non-alphanumeric bytes (including all non-ASCII) become separators; the
// remaining runs are lowercased and lemmatized.
inline TokenSequence normalize(std::string_view text) {
  TokenSequence out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(lemmatize(current));
      current.clear();
    }
  };
  for (char c : text) {
    if (detail::is_ascii_alnum(c)) {
      current.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

// True when every token is a non-empty run of [a-z0-9].
inline bool is_normalized(const TokenSequence& tokens) {
  return std::all_of(tokens.begin(), tokens.end(), [](const std::string& t) {
    return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    });
  });
}

class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab() : Vocab(std::vector<std::string>{}, 1) {}

  // `tokens` are the regular entries, assigned ids 2, 3, ... in order.
  Vocab(std::vector<std::string> tokens, std::size_t min_freq) : min_freq_(min_freq) {
    id_to_token_.reserve(tokens.size() + 2);
    id_to_token_.emplace_back(kPadToken);
    id_to_token_.emplace_back(kUnkToken);
    for (auto& t : tokens) id_to_token_.push_back(std::move(t));
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
      if (!token_to_id_.emplace(id_to_token_[i], i).second) {
        throw DataError("vocab: duplicate token '" + id_to_token_[i] + "'");
      }
    }
  }

  std::size_t size() const { return id_to_token_.size(); }
  std::size_t min_freq() const { return min_freq_; }

  std::size_t id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? kUnk : it->second;
  }

  bool contains(std::string_view token) const {
    return token_to_id_.count(std::string(token)) != 0;
  }

  const std::string& token(std::size_t id) const { return id_to_token_.at(id); }

  const std::vector<std::string>& tokens() const { return id_to_token_; }

  // Content hash over the id-ordered token list.
  std::string content_hash() const {
    Fnv1a h;
    for (const auto& t : id_to_token_) {
      h.update(t);
      h.update(std::string_view("\n", 1));
    }
    return to_hex(h.digest());
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) j[id_to_token_[i]] = i;
    return j;
  }

  static Vocab from_json(const nlohmann::json& j, std::size_t min_freq = 1) {
    if (!j.is_object()) throw DataError("vocab: expected a JSON object");
    std::vector<std::string> by_id(j.size());
    std::vector<bool> seen(j.size(), false);
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_number_unsigned()) {
        throw DataError("vocab: id for '" + it.key() + "' is not a non-negative integer");
      }
      auto id = it.value().get<std::size_t>();
      if (id >= by_id.size() || seen[id]) {
        throw DataError("vocab: ids must be contiguous from 0 without repeats");
      }
      seen[id] = true;
      by_id[id] = it.key();
    }
    if (by_id.size() < 2 || by_id[kPad] != kPadToken || by_id[kUnk] != kUnkToken) {
      throw DataError("vocab: ids 0 and 1 must be <pad> and <unk>");
    }
    return Vocab(std::vector<std::string>(by_id.begin() + 2, by_id.end()), min_freq);
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write vocab file " + path.string());
    out << to_json().dump() << '\n';
  }

  static Vocab load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read vocab file " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("vocab file is not valid JSON: " + path.string());
    return from_json(j);
  }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::size_t> token_to_id_;
  std::size_t min_freq_ = 1;
};

// Tokens with frequency >= min_freq get ids from 2 upward, ordered by
// descending frequency and then lexicographically.
inline Vocab build_vocab(const std::vector<TokenSequence>& corpus, std::size_t min_freq) {
  if (corpus.empty()) throw DataError("build_vocab: corpus is empty");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : corpus)
    for (const auto& t : doc) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : freq)
    if (n >= min_freq) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [tok, n] : kept) tokens.push_back(tok);
  return Vocab(std::move(tokens), min_freq);
}

struct EncodedExample {
  std::vector<std::size_t> ids;
  std::size_t true_length = 0;
};

// Maps to ids (UNK when out of vocabulary), keeps the first maxlen tokens and
// right-pads with PAD.
inline EncodedExample encode_pad(const TokenSequence& tokens, const Vocab& vocab,
                                 std::size_t maxlen) {
  if (maxlen == 0) throw ConfigError("encode_pad: maxlen must be >= 1");
  EncodedExample ex;
  ex.ids.assign(maxlen, Vocab::kPad);
  ex.true_length = std::min(tokens.size(), maxlen);
  for (std::size_t i = 0; i < ex.true_length; ++i) ex.ids[i] = vocab.id(tokens[i]);
  return ex;
}

inline TokenSequence decode(const EncodedExample& ex, const Vocab& vocab) {
  TokenSequence out;
  out.reserve(ex.true_length);
  for (std::size_t i = 0; i < ex.true_length; ++i) out.push_back(vocab.token(ex.ids[i]));
  return out;
}

}  // namespace orgbin::textprep
