#pragma once

// Pre-trained word vectors (GloVe text format) and vocab-aligned matrices.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "orgbin/common.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::embed {

inline constexpr std::size_t kDefaultDim = 50;
inline constexpr double kDefaultInitRange = 0.25;

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = kDefaultDim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }

  // Returns false if the word is already present; the first vector is kept.
  bool add(std::string word, std::vector<double> vec) {
    if (vec.size() != dim_) throw DimensionError("embedding vector has wrong dimension");
    if (index_.count(word)) return false;
    index_.emplace(word, words_.size());
    words_.push_back(std::move(word));
    values_.insert(values_.end(), vec.begin(), vec.end());
    return true;
  }

  bool contains(std::string_view word) const { return index_.count(std::string(word)) != 0; }

  // Null when absent; otherwise `dim()` contiguous values.
  const double* find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? nullptr : values_.data() + it->second * dim_;
  }

  const std::vector<std::string>& words() const { return words_; }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reads "word v1 v2 ... vd" lines. The dimension comes from `expected_dim`
// when given, otherwise from the first line.
inline EmbeddingTable load_embeddings(const std::filesystem::path& path,
                                      std::optional<std::size_t> expected_dim = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read embeddings file " + path.string());
  std::optional<EmbeddingTable> table;
  if (expected_dim) {
    if (*expected_dim == 0) throw ConfigError("embedding dimension must be >= 1");
    table.emplace(*expected_dim);
  }
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fields.clear();
    std::string_view rest(line);
    while (!rest.empty()) {
      auto b = rest.find_first_not_of(" \t");
      if (b == std::string_view::npos) break;
      rest.remove_prefix(b);
      auto e = rest.find_first_of(" \t");
      fields.push_back(rest.substr(0, e));
      rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
    }
    if (fields.empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (fields.size() < 2) throw DataError(where + ": word without a vector");
    const std::size_t d = fields.size() - 1;
    if (!table) table.emplace(d);
    if (d != table->dim()) {
      throw DataError(where + ": dimension " + std::to_string(d) + ", expected " +
                      std::to_string(table->dim()));
    }
    std::vector<double> vec(d);
    for (std::size_t i = 0; i < d; ++i) {
      auto f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[i]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError(where + ": non-numeric field '" + std::string(f) + "'");
      }
    }
    if (!table->add(std::string(fields[0]), std::move(vec))) {
      log::warn(where + ": duplicate word '" + std::string(fields[0]) +
                "', keeping the first vector");
    }
  }
  if (!table) throw DataError("embeddings file " + path.string() + " is empty");
  return std::move(*table);
}

struct EmbeddingMatrix {
  Eigen::MatrixXd values;  // vocab size x dim
  bool trainable = true;
  double coverage = 0.0;   // vocab entries found in the table / vocab size

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

// Rows come from the table where present; other rows (UNK included) are drawn
// uniformly from [-init_range, init_range] in id order; the PAD row is zero.
inline EmbeddingMatrix build_matrix(const textprep::Vocab& vocab, const EmbeddingTable& table,
                                    std::uint64_t seed, double init_range = kDefaultInitRange) {
  if (table.dim() == 0) throw ConfigError("embedding dimension must be >= 1");
  const auto rows = static_cast<Eigen::Index>(vocab.size());
  const auto dim = static_cast<Eigen::Index>(table.dim());
  EmbeddingMatrix m;
  m.values = Eigen::MatrixXd::Zero(rows, dim);
  Rng rng(seed);
  std::size_t found = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<std::size_t>(r) == textprep::Vocab::kPad) continue;
    const double* v = table.find(vocab.token(static_cast<std::size_t>(r)));
    if (v) {
      ++found;
      for (Eigen::Index c = 0; c < dim; ++c) m.values(r, c) = v[c];
    } else {
      for (Eigen::Index c = 0; c < dim; ++c) m.values(r, c) = rng.uniform(-init_range, init_range);
    }
  }
  m.coverage = rows == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(rows);
  log::info("embedding coverage " + std::to_string(found) + "/" + std::to_string(rows));
  return m;
}

}  // namespace orgbin::embed
