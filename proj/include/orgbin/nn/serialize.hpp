#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "orgbin/checkpoint.hpp"
#include "orgbin/nn/model.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::nn {

// Packs a trained model. `extra` is merged into the manifest (class names,
// config echo, ...).
inline checkpoint::Container to_container(const SequenceModelParams& p, const textprep::Vocab& vocab,
                                          const nlohmann::json& extra = nlohmann::json::object()) {
  p.check_shapes();
  if (p.embedding.rows() != static_cast<Index>(vocab.size()))
    throw DimensionError("embedding rows differ from vocab size");
  checkpoint::Container c;
  c.manifest = extra;
  c.manifest["model_kind"] = to_string(p.kind);
  c.manifest["cell_kind"] = to_string(p.forward.kind);
  c.manifest["bidirectional"] = p.backward.has_value();
  c.manifest["vocab_size"] = vocab.size();
  c.manifest["embed_dim"] = p.embedding.cols();
  c.manifest["hidden_dim"] = p.hidden_dim();
  c.manifest["num_classes"] = p.num_classes();
  c.manifest["train_embedding"] = p.train_embedding;
  c.manifest["vocab_hash"] = vocab.content_hash();
  c.arrays.push_back(checkpoint::from_matrix("embedding", p.embedding));
  auto add_cell = [&](const std::string& prefix, const CellParams& cell) {
    c.arrays.push_back(checkpoint::from_matrix(prefix + ".W", cell.W));
    c.arrays.push_back(checkpoint::from_matrix(prefix + ".U", cell.U));
    c.arrays.push_back(checkpoint::from_vector(prefix + ".b", cell.b));
  };
  add_cell("forward", p.forward);
  if (p.backward) add_cell("backward", *p.backward);
  c.arrays.push_back(checkpoint::from_matrix("head.W", p.head_w));
  c.arrays.push_back(checkpoint::from_vector("head.b", p.head_b));
  return c;
}

// Rebuilds a model, checking every shape and the vocab hash.
inline SequenceModelParams from_container(const checkpoint::Container& c, const textprep::Vocab& vocab) {
  const auto& m = c.manifest;
  auto kind = model_kind_from_string(m.at("model_kind").get<std::string>());
  if (!kind) throw DataError("checkpoint is not a sequence model");
  if (m.at("vocab_hash").get<std::string>() != vocab.content_hash())
    throw DataError("checkpoint was trained with a different vocabulary");
  const auto v = static_cast<Index>(vocab.size());
  const auto d = m.at("embed_dim").get<Index>();
  const auto h = m.at("hidden_dim").get<Index>();
  const auto k = m.at("num_classes").get<Index>();
  if (m.at("vocab_size").get<Index>() != v) throw DataError("checkpoint vocab size mismatch");
  SequenceModelParams p;
  p.kind = *kind;
  p.train_embedding = m.at("train_embedding").get<bool>();
  p.embedding = c.matrix("embedding", v, d);
  auto read_cell = [&](const std::string& prefix) {
    CellParams cell(cell_kind_of(*kind), d, h);
    const Index g = gate_count(cell.kind) * h;
    cell.W = c.matrix(prefix + ".W", g, d);
    cell.U = c.matrix(prefix + ".U", g, h);
    cell.b = c.vector(prefix + ".b", g);
    return cell;
  };
  p.forward = read_cell("forward");
  if (is_bidirectional(*kind)) p.backward = read_cell("backward");
  p.head_w = c.matrix("head.W", k, h * (p.backward ? 2 : 1));
  p.head_b = c.vector("head.b", k);
  p.check_shapes();
  return p;
}

}  // namespace orgbin::nn
