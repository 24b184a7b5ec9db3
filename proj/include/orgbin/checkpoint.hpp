#pragma once

// Checkpoint container shared by all model kinds.
//
// Layout: one line of compact JSON (the manifest) terminated by '\n', then the
// arrays back to back as little-endian IEEE-754 float64 values. The manifest's
// "arrays" catalog lists {name, shape, offset, count} per array; offsets are
// byte offsets from the first byte after the newline. Matrices are row-major.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "orgbin/common.hpp"

namespace orgbin::checkpoint {

inline constexpr std::string_view kFormat = "orgbin-checkpoint/1";

struct Array {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

inline Array from_matrix(std::string name, const Eigen::MatrixXd& m) {
  Array a{std::move(name), {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, {}};
  a.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.data.push_back(m(r, c));
  return a;
}

inline Array from_vector(std::string name, const Eigen::VectorXd& v) {
  return {std::move(name), {static_cast<std::size_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size())};
}

struct Container {
  nlohmann::json manifest = nlohmann::json::object();
  std::vector<Array> arrays;

  const Array& array(const std::string& name) const {
    for (const auto& a : arrays)
      if (a.name == name) return a;
    throw DataError("checkpoint has no array '" + name + "'");
  }

  Eigen::MatrixXd matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) const {
    const auto& a = array(name);
    if (a.shape.size() != 2 || a.shape[0] != static_cast<std::size_t>(rows) ||
        a.shape[1] != static_cast<std::size_t>(cols))
      throw DataError("checkpoint array '" + name + "' has unexpected shape");
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a.data[k++];
    return m;
  }

  Eigen::VectorXd vector(const std::string& name, Eigen::Index size) const {
    const auto& a = array(name);
    if (a.shape.size() != 1 || a.shape[0] != static_cast<std::size_t>(size))
      throw DataError("checkpoint array '" + name + "' has unexpected shape");
    return Eigen::Map<const Eigen::VectorXd>(a.data.data(), size);
  }
};

namespace detail {

inline void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline std::string serialize(const Container& c) {
  nlohmann::json manifest = c.manifest;
  manifest["format"] = kFormat;
  nlohmann::json catalog = nlohmann::json::array();
  std::string payload;
  for (const auto& a : c.arrays) {
    std::size_t count = 1;
    for (auto s : a.shape) count *= s;
    if (count != a.data.size()) throw DimensionError("array '" + a.name + "' shape/data mismatch");
    catalog.push_back({{"name", a.name}, {"shape", a.shape}, {"offset", payload.size()}, {"count", count}});
    for (double v : a.data) detail::put_f64(payload, v);
  }
  manifest["arrays"] = catalog;
  return manifest.dump() + "\n" + payload;
}

inline Container deserialize(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw DataError("checkpoint: missing manifest line");
  auto manifest = nlohmann::json::parse(bytes.substr(0, nl), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object())
    throw DataError("checkpoint: manifest is not a JSON object");
  if (manifest.value("format", "") != kFormat) throw DataError("checkpoint: unknown format");
  const auto* base = reinterpret_cast<const unsigned char*>(bytes.data()) + nl + 1;
  const std::size_t payload = bytes.size() - nl - 1;
  Container c;
  for (const auto& entry : manifest.at("arrays")) {
    Array a;
    a.name = entry.at("name").get<std::string>();
    a.shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto count = entry.at("count").get<std::size_t>();
    std::size_t expect = 1;
    for (auto s : a.shape) expect *= s;
    if (expect != count || offset % 8 != 0 || offset + 8 * count > payload)
      throw DataError("checkpoint: array '" + a.name + "' is out of bounds");
    a.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) a.data[i] = detail::get_f64(base + offset + 8 * i);
    c.arrays.push_back(std::move(a));
  }
  manifest.erase("arrays");
  c.manifest = std::move(manifest);
  return c;
}

inline void save(const std::filesystem::path& path, const Container& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write checkpoint " + path.string());
  const auto bytes = serialize(c);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

inline Container load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace orgbin::checkpoint
