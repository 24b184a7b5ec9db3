#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orgbin/common.hpp"
#include "orgbin/nn/model.hpp"

namespace orgbin::nn {

enum class OptimizerKind { adam, sgd };

inline std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

inline OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double clip_norm = 5.0;  // global gradient norm; 0 disables clipping
  std::uint64_t seed = 0;
  std::size_t patience = 0;  // epochs without improvement before stopping; 0 disables
  std::size_t hidden_dim = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning rate must be > 0");
    if (!(clip_norm >= 0.0)) throw ConfigError("clip norm must be >= 0");
    if (hidden_dim < 1) throw ConfigError("hidden dim must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
      throw ConfigError("adam coefficients out of range");
  }

  nlohmann::json to_json() const {
    return {{"epochs", epochs},          {"batch_size", batch_size},
            {"learning_rate", learning_rate}, {"optimizer", to_string(optimizer)},
            {"clip_norm", clip_norm},    {"seed", seed},
            {"patience", patience},      {"hidden_dim", hidden_dim},
            {"beta1", beta1},            {"beta2", beta2},
            {"epsilon", epsilon}};
  }
};

// Adam (or plain SGD) over the model's tensor list. The PAD embedding row is
// never updated.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, SequenceModelParams& model) : cfg_(cfg) {
    if (cfg_.optimizer == OptimizerKind::adam) {
      m_ = model.zeros_like();
      v_ = model.zeros_like();
    }
  }

  void step(SequenceModelParams& model, SequenceModelParams& grads) {
    ++t_;
    auto params = tensors(model);
    auto gs = tensors(grads);
    if (cfg_.clip_norm > 0.0) {
      double sq = 0.0;
      for (const auto& g : gs) sq += g.flat().squaredNorm();
      const double norm = std::sqrt(sq);
      if (norm > cfg_.clip_norm) {
        const double s = cfg_.clip_norm / norm;
        for (auto& g : gs) g.flat() *= s;
      }
    }
    const double lr = cfg_.learning_rate;
    if (cfg_.optimizer == OptimizerKind::sgd) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (k == 0 && !model.train_embedding) continue;
        params[k].flat() -= lr * gs[k].flat();
      }
    } else {
      auto ms = tensors(m_);
      auto vs = tensors(v_);
      const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (k == 0 && !model.train_embedding) continue;
        auto g = gs[k].flat();
        auto m = ms[k].flat();
        auto v = vs[k].flat();
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        params[k].flat().array() -=
            lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.epsilon);
      }
    }
    model.embedding.row(textprep::Vocab::kPad).setZero();
  }

 private:
  TrainConfig cfg_;
  SequenceModelParams m_;
  SequenceModelParams v_;
  std::uint64_t t_ = 0;
};

struct TrainResult {
  SequenceModelParams model;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

// Mini-batch training. Each epoch visits the examples in a seeded shuffle;
// the recorded loss is the mean of the batch losses weighted by batch size.
inline TrainResult train(ModelKind kind, const embed::EmbeddingMatrix& embedding,
                         std::span<const LabeledExample> data, Index num_classes,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw DataError("train: empty training split");
  for (const auto& item : data)
    if (item.label < 0 || item.label >= num_classes)
      throw DataError("train: label out of range");
  TrainResult res;
  res.model = init_params(kind, embedding, static_cast<Index>(cfg.hidden_dim), num_classes,
                          derive_seed(cfg.seed, "init"));
  Optimizer opt(cfg, res.model);
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabeledExample> batch;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(data[order[i]]);
      GradientResult gr;
      try {
        gr = compute_gradients(res.model, batch);
      } catch (const DataError& e) {
        if (std::string_view(e.what()).find("not finite") == std::string_view::npos) throw;
        throw TrainingDiverged("training diverged: " + std::string(e.what()) + " in epoch " +
                               std::to_string(epoch + 1));
      }
      if (!std::isfinite(gr.loss)) {
        throw TrainingDiverged("training diverged: non-finite loss in epoch " +
                               std::to_string(epoch + 1) + " at example offset " +
                               std::to_string(start));
      }
      total += gr.loss * static_cast<double>(stop - start);
      opt.step(res.model, gr.grads);
    }
    const double epoch_loss = total / static_cast<double>(order.size());
    res.loss_curve.push_back(epoch_loss);
    if (cfg.patience > 0) {
      if (epoch_loss < best) {
        best = epoch_loss;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }
  bool finite = res.model.forward.all_finite() && res.model.head_w.allFinite() &&
                res.model.head_b.allFinite() && res.model.embedding.allFinite();
  if (res.model.backward) finite = finite && res.model.backward->all_finite();
  if (!finite) throw TrainingDiverged("training diverged: non-finite parameters");
  return res;
}

}  // namespace orgbin::nn
