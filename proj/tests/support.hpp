#pragma once

// Shared helpers for the unit and acceptance tests: scratch directories and
// synthetic corpora.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "orgbin/common.hpp"
#include "orgbin/gold.hpp"

namespace orgbin::testing {

// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("orgbin_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline nlohmann::json post_json(const std::string& forum, const std::string& id, const std::string& title = "t",
                                const std::string& code = "", const std::string& date = "26-Sep-19",
                                const std::string& language = "English") {
  return {{"post_id", id},
          {"forum", forum},
          {"language", language},
          {"title", title},
          {"date", date},
          {"author", "someone"},
          {"author_reputation", "3/5 stars"},
          {"description", "d"},
          {"source_code", code},
          {"discussion", ""}};
}

inline std::vector<std::string> distractors(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("tok" + std::to_string(i));
  return out;
}

// Two classes decided only by token order: "alpha" before "beta" is
// Databases, after is Software. Every document holds exactly one of each
// marker among random distractors, so any bag-of-words view is uninformative.
inline std::vector<gold::GoldRecord> order_task(std::size_t n_docs, std::uint64_t seed) {
  Rng rng(seed);
  const auto noise = distractors(20);
  std::vector<gold::GoldRecord> out;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const bool alpha_first = i % 2 == 0;
    const std::size_t len = 6 + rng.below(5);
    std::vector<std::string> tokens(len);
    for (auto& t : tokens) t = noise[rng.below(noise.size())];
    std::size_t a = rng.below(len);
    std::size_t b = rng.below(len - 1);
    if (b >= a) ++b;
    if ((a < b) != alpha_first) std::swap(a, b);
    tokens[a] = "alpha";
    tokens[b] = "beta";
    out.push_back({"order" + std::to_string(i), std::move(tokens), alpha_first ? "Databases" : "Software", {}});
  }
  return out;
}

// Five classes, each with its own keywords mixed into shared distractors.
inline std::vector<gold::GoldRecord> keyword_task(std::size_t n_docs, std::uint64_t seed) {
  Rng rng(seed);
  const auto noise = distractors(30);
  const auto bins = gold::default_bins().names();
  std::vector<gold::GoldRecord> out;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const std::size_t c = i % bins.size();
    const std::size_t len = 6 + rng.below(5);
    std::vector<std::string> tokens(len);
    for (auto& t : tokens) {
      if (rng.uniform01() < 0.4)
        t = "kw" + std::to_string(c) + "x" + std::to_string(rng.below(4));
      else
        t = noise[rng.below(noise.size())];
    }
    tokens[rng.below(len)] = "kw" + std::to_string(c) + "x" + std::to_string(rng.below(4));
    out.push_back({"kw" + std::to_string(i), std::move(tokens), bins[c], {}});
  }
  return out;
}

// Records whose class sizes are given exactly; tokens are filler.
inline std::vector<gold::GoldRecord> sized_records(const std::vector<std::pair<std::string, std::size_t>>& sizes) {
  std::vector<gold::GoldRecord> out;
  std::size_t id = 0;
  for (const auto& [bin, n] : sizes)
    for (std::size_t i = 0; i < n; ++i)
      out.push_back({"r" + std::to_string(id++), {"x" + std::to_string(i % 7)}, bin, {}});
  return out;
}

// Class sizes of the reference gold set.
inline const std::vector<std::pair<std::string, std::size_t>>& reference_class_sizes() {
  static const std::vector<std::pair<std::string, std::size_t>> sizes{
      {"Databases", 1780}, {"Software", 1351}, {"Open Source", 961}, {"Mobile", 673}, {"Video Games", 445}};
  return sizes;
}

}  // namespace orgbin::testing
