#pragma once

// Embedding -> recurrent encoder (one or two directions) -> softmax head.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orgbin/common.hpp"
#include "orgbin/embed.hpp"
#include "orgbin/nn/cell.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::nn {

enum class ModelKind { rnn, gru, lstm, bilstm };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::rnn: return "rnn";
    case ModelKind::gru: return "gru";
    case ModelKind::lstm: return "lstm";
    case ModelKind::bilstm: return "bilstm";
  }
  return "?";
}

inline std::optional<ModelKind> model_kind_from_string(std::string_view s) {
  if (s == "rnn") return ModelKind::rnn;
  if (s == "gru") return ModelKind::gru;
  if (s == "lstm") return ModelKind::lstm;
  if (s == "bilstm") return ModelKind::bilstm;
  return std::nullopt;
}

inline CellKind cell_kind_of(ModelKind k) {
  switch (k) {
    case ModelKind::rnn: return CellKind::rnn;
    case ModelKind::gru: return CellKind::gru;
    default: return CellKind::lstm;
  }
}

inline bool is_bidirectional(ModelKind k) { return k == ModelKind::bilstm; }

struct SequenceModelParams {
  ModelKind kind = ModelKind::bilstm;
  MatrixXd embedding;  // vocab size x d; row 0 is PAD
  bool train_embedding = true;
  CellParams forward;
  std::optional<CellParams> backward;  // present iff bidirectional
  MatrixXd head_w;  // K x F, F = h or 2h
  VectorXd head_b;  // K

  Index num_classes() const { return head_w.rows(); }
  Index hidden_dim() const { return forward.hidden_dim(); }
  Index feature_dim() const { return head_w.cols(); }

  void check_shapes() const {
    forward.check_shapes();
    if (forward.input_dim() != embedding.cols())
      throw DimensionError("cell input dim differs from embedding dim");
    if (is_bidirectional(kind) != backward.has_value())
      throw DimensionError("backward cell present iff model is bidirectional");
    const Index f = hidden_dim() * (backward ? 2 : 1);
    if (backward) {
      backward->check_shapes();
      if (backward->hidden_dim() != hidden_dim() || backward->input_dim() != embedding.cols())
        throw DimensionError("backward cell shape differs from forward cell");
    }
    if (head_w.cols() != f || head_b.size() != head_w.rows())
      throw DimensionError("softmax head shape is inconsistent");
  }

  // Same shapes, all zeros.
  SequenceModelParams zeros_like() const {
    SequenceModelParams z;
    z.kind = kind;
    z.train_embedding = train_embedding;
    z.embedding = MatrixXd::Zero(embedding.rows(), embedding.cols());
    z.forward = CellParams(forward.kind, forward.input_dim(), forward.hidden_dim());
    if (backward) z.backward = CellParams(backward->kind, backward->input_dim(), backward->hidden_dim());
    z.head_w = MatrixXd::Zero(head_w.rows(), head_w.cols());
    z.head_b = VectorXd::Zero(head_b.size());
    return z;
  }
};

// Named flat view over one parameter tensor.
struct TensorRef {
  std::string name;
  double* data;
  Index rows;
  Index cols;

  Index size() const { return rows * cols; }
  Eigen::Map<VectorXd> flat() const { return Eigen::Map<VectorXd>(data, size()); }
};

// Every tensor of the model, in a fixed order shared by params, gradients and
// optimizer state.
inline std::vector<TensorRef> tensors(SequenceModelParams& p) {
  std::vector<TensorRef> out;
  auto add = [&](std::string name, auto& m) {
    out.push_back({std::move(name), m.data(), m.rows(), m.cols()});
  };
  add("embedding", p.embedding);
  add("forward.W", p.forward.W);
  add("forward.U", p.forward.U);
  add("forward.b", p.forward.b);
  if (p.backward) {
    add("backward.W", p.backward->W);
    add("backward.U", p.backward->U);
    add("backward.b", p.backward->b);
  }
  add("head.W", p.head_w);
  add("head.b", p.head_b);
  return out;
}

namespace detail {

inline void xavier(MatrixXd& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
}

inline CellParams init_cell(CellKind kind, Index d, Index h, Rng& rng) {
  CellParams p(kind, d, h);
  xavier(p.W, rng);
  xavier(p.U, rng);
  if (kind == CellKind::lstm) p.b.segment(h, h).setOnes();  // forget gate
  return p;
}

}  // namespace detail

// Matrices uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero except the
// LSTM forget bias (1.0).
inline SequenceModelParams init_params(ModelKind kind, const embed::EmbeddingMatrix& emb,
                                       Index hidden_dim, Index num_classes, std::uint64_t seed) {
  if (hidden_dim < 1) throw ConfigError("hidden dim must be >= 1");
  if (num_classes < 2) throw ConfigError("need at least two classes");
  if (emb.values.rows() < 2 || emb.values.cols() < 1)
    throw ConfigError("embedding matrix must have PAD and UNK rows and dim >= 1");
  Rng rng(seed);
  SequenceModelParams p;
  p.kind = kind;
  p.embedding = emb.values;
  p.embedding.row(textprep::Vocab::kPad).setZero();
  p.train_embedding = emb.trainable;
  const Index d = emb.values.cols();
  p.forward = detail::init_cell(cell_kind_of(kind), d, hidden_dim, rng);
  if (is_bidirectional(kind)) p.backward = detail::init_cell(cell_kind_of(kind), d, hidden_dim, rng);
  p.head_w = MatrixXd::Zero(num_classes, hidden_dim * (p.backward ? 2 : 1));
  detail::xavier(p.head_w, rng);
  p.head_b = VectorXd::Zero(num_classes);
  return p;
}

// Max-subtracted softmax.
inline VectorXd softmax(const VectorXd& z) {
  if (z.size() == 0) throw DimensionError("softmax of an empty vector");
  if (!z.allFinite()) throw DataError("softmax input is not finite");
  VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

inline constexpr double kProbFloor = 1e-12;

inline double cross_entropy(const VectorXd& probs, Index label) {
  if (label < 0 || label >= probs.size())
    throw DimensionError("label " + std::to_string(label) + " out of range for " +
                         std::to_string(probs.size()) + " classes");
  return -std::log(std::max(probs(label), kProbFloor));
}

// Lowest index wins ties.
inline Index argmax(const VectorXd& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

struct DirectionTrace {
  std::vector<StepCache> steps;
};

struct ForwardTrace {
  DirectionTrace fwd;
  DirectionTrace bwd;
  VectorXd features;
  VectorXd logits;
};

namespace detail {

inline void check_example(const SequenceModelParams& p, const textprep::EncodedExample& ex) {
  if (ex.true_length == 0) throw DataError("sequence has true_length 0");
  if (ex.true_length > ex.ids.size()) throw DimensionError("true_length exceeds sequence length");
  for (std::size_t t = 0; t < ex.true_length; ++t)
    if (ex.ids[t] >= static_cast<std::size_t>(p.embedding.rows()))
      throw DimensionError("token id " + std::to_string(ex.ids[t]) + " outside the embedding");
}

// Runs one direction over positions [0, true_length), reversed when asked.
inline VectorXd run_direction(const CellParams& cell, const MatrixXd& emb,
                              const textprep::EncodedExample& ex, bool reversed,
                              DirectionTrace* trace) {
  CellState s = CellState::zero(cell);
  const std::size_t n = ex.true_length;
  if (trace) trace->steps.resize(n);
  StepCache scratch;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reversed ? n - 1 - k : k;
    VectorXd x = emb.row(static_cast<Index>(ex.ids[t])).transpose();
    s = forward_step(cell, x, s, trace ? trace->steps[k] : scratch);
  }
  return s.h;
}

}  // namespace detail

// Final forward state, concatenated with the final backward state when the
// model is bidirectional. PAD positions past true_length are never read.
inline VectorXd encode_features(const SequenceModelParams& p, const textprep::EncodedExample& ex,
                                ForwardTrace* trace = nullptr) {
  detail::check_example(p, ex);
  const Index h = p.hidden_dim();
  VectorXd feat(p.backward ? 2 * h : h);
  feat.head(h) = detail::run_direction(p.forward, p.embedding, ex, false, trace ? &trace->fwd : nullptr);
  if (p.backward)
    feat.tail(h) = detail::run_direction(*p.backward, p.embedding, ex, true, trace ? &trace->bwd : nullptr);
  return feat;
}

inline VectorXd forward_logits(const SequenceModelParams& p, const textprep::EncodedExample& ex,
                               ForwardTrace* trace = nullptr) {
  VectorXd feat = encode_features(p, ex, trace);
  VectorXd logits = p.head_w * feat + p.head_b;
  if (trace) {
    trace->features = feat;
    trace->logits = logits;
  }
  return logits;
}

struct Prediction {
  Index label = 0;
  VectorXd probs;
};

inline Prediction predict(const SequenceModelParams& p, const textprep::EncodedExample& ex) {
  Prediction out;
  out.probs = softmax(forward_logits(p, ex));
  out.label = argmax(out.probs);
  return out;
}

struct LabeledExample {
  textprep::EncodedExample example;
  Index label = 0;
};

struct GradientResult {
  SequenceModelParams grads;  // same shapes as the model
  double loss = 0.0;          // mean batch loss
};

namespace detail {

inline void backprop_direction(const CellParams& cell, const DirectionTrace& trace,
                               const textprep::EncodedExample& ex, bool reversed,
                               const VectorXd& dh_final, CellParams& g, MatrixXd* demb,
                               double scale) {
  const std::size_t n = trace.steps.size();
  VectorXd dh = dh_final;
  VectorXd dc = VectorXd::Zero(cell.hidden_dim());
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t t = reversed ? n - 1 - k : k;
    StepGrads sg = backward_step(cell, trace.steps[k], dh, dc, g);
    if (demb) demb->row(static_cast<Index>(ex.ids[t])) += scale * sg.dx.transpose();
    dh = std::move(sg.dh_prev);
    if (cell.kind == CellKind::lstm) dc = std::move(sg.dc_prev);
  }
}

}  // namespace detail

// Exact gradients of the mean cross-entropy over `batch`, by backpropagation
// through time over each example's true length. The PAD embedding row never
// receives gradient.
inline GradientResult compute_gradients(const SequenceModelParams& p,
                                        std::span<const LabeledExample> batch) {
  if (batch.empty()) throw DataError("compute_gradients: empty batch");
  p.check_shapes();
  GradientResult res;
  res.grads = p.zeros_like();
  auto& g = res.grads;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const Index h = p.hidden_dim();
  // Cell gradients are accumulated unscaled and divided once at the end; the
  // embedding rows are scaled as they are written.
  MatrixXd* demb = p.train_embedding ? &g.embedding : nullptr;
  for (const auto& item : batch) {
    ForwardTrace trace;
    forward_logits(p, item.example, &trace);
    VectorXd probs = softmax(trace.logits);
    res.loss += cross_entropy(probs, item.label);
    VectorXd dlogits = probs;
    dlogits(item.label) -= 1.0;
    g.head_w.noalias() += dlogits * trace.features.transpose();
    g.head_b += dlogits;
    VectorXd dfeat = p.head_w.transpose() * dlogits;
    detail::backprop_direction(p.forward, trace.fwd, item.example, false, dfeat.head(h), g.forward,
                               demb, scale);
    if (p.backward)
      detail::backprop_direction(*p.backward, trace.bwd, item.example, true, dfeat.tail(h),
                                 *g.backward, demb, scale);
  }
  res.loss *= scale;
  g.head_w *= scale;
  g.head_b *= scale;
  auto scale_cell = [&](CellParams& c) {
    c.W *= scale;
    c.U *= scale;
    c.b *= scale;
  };
  scale_cell(g.forward);
  if (g.backward) scale_cell(*g.backward);
  g.embedding.row(textprep::Vocab::kPad).setZero();
  return res;
}

// Mean loss only (used by finite-difference checks and evaluation).
inline double mean_loss(const SequenceModelParams& p, std::span<const LabeledExample> batch) {
  double loss = 0.0;
  for (const auto& item : batch) loss += cross_entropy(softmax(forward_logits(p, item.example)), item.label);
  return loss / static_cast<double>(batch.size());
}

}  // namespace orgbin::nn
