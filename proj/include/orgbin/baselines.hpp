#pragma once

// Bag-of-words baselines: multinomial naive Bayes, softmax logistic
// regression, one-vs-rest linear SVM and a CART decision tree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "orgbin/checkpoint.hpp"
#include "orgbin/common.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::baselines {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BowVector {
  std::vector<std::pair<std::size_t, std::size_t>> counts;  // (token id, count), ascending id
  std::size_t total = 0;

  std::size_t count(std::size_t id) const {
    auto it = std::lower_bound(counts.begin(), counts.end(), std::make_pair(id, std::size_t{0}));
    return it != counts.end() && it->first == id ? it->second : 0;
  }
};

// Out-of-vocabulary tokens are counted under UNK.
inline BowVector featurize_bow(const textprep::TokenSequence& tokens, const textprep::Vocab& vocab) {
  std::map<std::size_t, std::size_t> m;
  for (const auto& t : tokens) ++m[vocab.id(t)];
  BowVector b;
  b.counts.assign(m.begin(), m.end());
  b.total = tokens.size();
  return b;
}

enum class BaselineKind { nb, logreg, svm, dtree };

inline std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::nb: return "nb";
    case BaselineKind::logreg: return "logreg";
    case BaselineKind::svm: return "svm";
    case BaselineKind::dtree: return "dtree";
  }
  return "?";
}

inline std::optional<BaselineKind> baseline_kind_from_string(std::string_view s) {
  if (s == "nb") return BaselineKind::nb;
  if (s == "logreg") return BaselineKind::logreg;
  if (s == "svm") return BaselineKind::svm;
  if (s == "dtree") return BaselineKind::dtree;
  return std::nullopt;
}

enum class Weighting { counts, tfidf };

struct BaselineConfig {
  Weighting weighting = Weighting::counts;
  double nb_alpha = 1.0;
  double logreg_l2 = 1e-4;
  double logreg_lr = 0.1;
  std::size_t logreg_iters = 500;
  double svm_c = 1.0;
  double svm_eta0 = 1.0;
  std::size_t svm_iters = 500;
  std::size_t tree_max_depth = 20;
  std::size_t tree_min_leaf = 2;

  void validate() const {
    if (!(nb_alpha > 0.0)) throw ConfigError("nb alpha must be > 0");
    if (!(logreg_l2 >= 0.0)) throw ConfigError("logreg l2 must be >= 0");
    if (!(logreg_lr > 0.0)) throw ConfigError("logreg learning rate must be > 0");
    if (!(svm_c > 0.0)) throw ConfigError("svm C must be > 0");
    if (!(svm_eta0 > 0.0)) throw ConfigError("svm step size must be > 0");
    if (logreg_iters < 1 || svm_iters < 1) throw ConfigError("iteration counts must be >= 1");
    if (tree_max_depth < 1 || tree_min_leaf < 1) throw ConfigError("tree limits must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"weighting", weighting == Weighting::counts ? "counts" : "tfidf"},
            {"nb_alpha", nb_alpha},
            {"logreg_l2", logreg_l2},
            {"logreg_lr", logreg_lr},
            {"logreg_iters", logreg_iters},
            {"svm_c", svm_c},
            {"svm_eta0", svm_eta0},
            {"svm_iters", svm_iters},
            {"tree_max_depth", tree_max_depth},
            {"tree_min_leaf", tree_min_leaf}};
  }
};

struct TreeNode {
  // Internal nodes: feature >= 0, samples with value <= threshold go left.
  std::int64_t feature = -1;
  double threshold = 0.0;
  std::int64_t left = -1;
  std::int64_t right = -1;
  std::vector<double> class_probs;  // leaves only
};

struct BaselineModel {
  BaselineKind kind = BaselineKind::nb;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;  // vocab size
  Weighting weighting = Weighting::counts;
  VectorXd idf;         // tfidf only
  VectorXd log_prior;   // nb
  MatrixXd log_lik;     // nb: K x V
  MatrixXd weights;     // logreg / svm: K x V
  VectorXd bias;        // logreg / svm
  std::vector<TreeNode> nodes;  // dtree; nodes[0] is the root

  std::size_t tree_depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t depth = 0;
    while (!stack.empty()) {
      auto [n, d] = stack.back();
      stack.pop_back();
      depth = std::max(depth, d);
      if (nodes[n].feature >= 0) {
        stack.emplace_back(static_cast<std::size_t>(nodes[n].left), d + 1);
        stack.emplace_back(static_cast<std::size_t>(nodes[n].right), d + 1);
      }
    }
    return depth;
  }
};

// Feature values after weighting, as (id, value) pairs.
using SparseRow = std::vector<std::pair<std::size_t, double>>;

inline SparseRow weighted(const BowVector& x, const BaselineModel& m) {
  SparseRow row;
  row.reserve(x.counts.size());
  for (auto [id, n] : x.counts) {
    if (id >= m.num_features) continue;
    double v = static_cast<double>(n);
    if (m.weighting == Weighting::tfidf) v *= m.idf(static_cast<Index>(id));
    row.emplace_back(id, v);
  }
  return row;
}

namespace detail {

inline Index argmax(const VectorXd& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

inline VectorXd sparse_affine(const MatrixXd& w, const VectorXd& b, const SparseRow& x) {
  VectorXd s = b;
  for (auto [id, v] : x) s += v * w.col(static_cast<Index>(id));
  return s;
}

inline VectorXd softmax(const VectorXd& z) {
  VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace detail

// Mean cross-entropy plus (l2 / 2) * ||W||^2, and its gradient.
struct LogregObjective {
  double value = 0.0;
  MatrixXd grad_w;
  VectorXd grad_b;
};

inline LogregObjective logreg_objective(const MatrixXd& w, const VectorXd& b,
                                        const std::vector<SparseRow>& xs,
                                        std::span<const std::size_t> labels, double l2) {
  LogregObjective out;
  out.grad_w = l2 * w;
  out.grad_b = VectorXd::Zero(b.size());
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    VectorXd p = detail::softmax(detail::sparse_affine(w, b, xs[i]));
    out.value -= std::log(std::max(p(static_cast<Index>(labels[i])), 1e-300)) * inv_n;
    p(static_cast<Index>(labels[i])) -= 1.0;
    p *= inv_n;
    for (auto [id, v] : xs[i]) out.grad_w.col(static_cast<Index>(id)) += v * p;
    out.grad_b += p;
  }
  out.value += 0.5 * l2 * w.squaredNorm();
  return out;
}

// (lambda / 2) ||w||^2 + mean hinge for one binary problem, lambda = 1 / (C N).
inline double svm_objective(const VectorXd& w, double b, const std::vector<SparseRow>& xs,
                            const std::vector<double>& y, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double s = b;
    for (auto [id, v] : xs[i]) s += v * w(static_cast<Index>(id));
    loss += std::max(0.0, 1.0 - y[i] * s);
  }
  return 0.5 * lambda * w.squaredNorm() + loss / static_cast<double>(xs.size());
}

namespace detail {

inline double gini(const std::vector<double>& counts, double n) {
  if (n <= 0.0) return 0.0;
  double s = 1.0;
  for (double c : counts) s -= (c / n) * (c / n);
  return s;
}

struct TreeBuilder {
  const std::vector<SparseRow>& xs;
  std::span<const std::size_t> labels;
  std::size_t num_classes;
  std::size_t num_features;
  std::size_t max_depth;
  std::size_t min_leaf;
  std::vector<TreeNode> nodes;

  std::vector<double> class_counts(const std::vector<std::size_t>& idx) const {
    std::vector<double> c(num_classes, 0.0);
    for (auto i : idx) c[labels[i]] += 1.0;
    return c;
  }

  std::int64_t make_leaf(const std::vector<double>& counts, double n) {
    TreeNode leaf;
    leaf.class_probs.resize(num_classes);
    for (std::size_t k = 0; k < num_classes; ++k) leaf.class_probs[k] = counts[k] / n;
    nodes.push_back(std::move(leaf));
    return static_cast<std::int64_t>(nodes.size() - 1);
  }

  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  std::optional<Split> best_split(const std::vector<std::size_t>& idx,
                                  const std::vector<double>& counts) const {
    const double n = static_cast<double>(idx.size());
    std::map<std::size_t, std::vector<std::pair<double, std::size_t>>> by_feature;
    for (auto i : idx)
      for (auto [id, v] : xs[i])
        if (v != 0.0) by_feature[id].emplace_back(v, labels[i]);
    std::optional<Split> best;
    for (auto& [feature, vals] : by_feature) {
      std::sort(vals.begin(), vals.end());
      // Samples without the feature sit at value 0, left of every nonzero value.
      std::vector<double> left(num_classes, 0.0);
      for (std::size_t k = 0; k < num_classes; ++k) left[k] = counts[k];
      for (const auto& [v, y] : vals) left[y] -= 1.0;
      double left_n = n - static_cast<double>(vals.size());
      double prev = 0.0;
      std::size_t pos = 0;
      while (true) {
        if (left_n >= static_cast<double>(min_leaf) && n - left_n >= static_cast<double>(min_leaf) &&
            left_n > 0.0 && pos < vals.size()) {
          std::vector<double> right(num_classes);
          for (std::size_t k = 0; k < num_classes; ++k) right[k] = counts[k] - left[k];
          const double imp = (left_n * gini(left, left_n) + (n - left_n) * gini(right, n - left_n)) / n;
          if (!best || imp < best->impurity) best = Split{feature, 0.5 * (prev + vals[pos].first), imp};
        }
        if (pos >= vals.size()) break;
        const double v = vals[pos].first;
        while (pos < vals.size() && vals[pos].first == v) {
          left[vals[pos].second] += 1.0;
          left_n += 1.0;
          ++pos;
        }
        prev = v;
      }
    }
    return best;
  }

  std::int64_t build(const std::vector<std::size_t>& idx, std::size_t depth) {
    const auto counts = class_counts(idx);
    const double n = static_cast<double>(idx.size());
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (pure || depth >= max_depth || idx.size() < 2 * min_leaf) return make_leaf(counts, n);
    auto split = best_split(idx, counts);
    if (!split) return make_leaf(counts, n);
    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      double v = 0.0;
      for (auto [id, x] : xs[i])
        if (id == split->feature) v = x;
      (v <= split->threshold ? left : right).push_back(i);
    }
    const auto self = static_cast<std::int64_t>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(self)].feature = static_cast<std::int64_t>(split->feature);
    nodes[static_cast<std::size_t>(self)].threshold = split->threshold;
    const auto l = build(left, depth + 1);
    const auto r = build(right, depth + 1);
    nodes[static_cast<std::size_t>(self)].left = l;
    nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

}  // namespace detail

// Trains one baseline. All four are deterministic; `seed` is accepted for a
// uniform interface and recorded by callers.
inline BaselineModel train_baseline(BaselineKind kind, std::span<const BowVector> features,
                                    std::span<const std::size_t> labels, std::size_t num_classes,
                                    std::size_t num_features, const BaselineConfig& cfg,
                                    std::uint64_t seed = 0) {
  (void)seed;
  cfg.validate();
  if (features.empty() || features.size() != labels.size())
    throw DataError("train_baseline: features and labels must be non-empty and equally long");
  if (num_classes < 2) throw DataError("train_baseline: need at least two classes");
  std::vector<std::size_t> per_class(num_classes, 0);
  for (auto y : labels) {
    if (y >= num_classes) throw DataError("train_baseline: label out of range");
    ++per_class[y];
  }
  for (std::size_t c = 0; c < num_classes; ++c)
    if (per_class[c] == 0) throw DataError("train_baseline: class " + std::to_string(c) + " has no examples");

  BaselineModel m;
  m.kind = kind;
  m.num_classes = num_classes;
  m.num_features = num_features;
  m.weighting = cfg.weighting;
  const auto K = static_cast<Index>(num_classes);
  const auto V = static_cast<Index>(num_features);
  const double N = static_cast<double>(features.size());
  if (cfg.weighting == Weighting::tfidf) {
    VectorXd df = VectorXd::Zero(V);
    for (const auto& x : features)
      for (auto [id, n] : x.counts)
        if (id < num_features) df(static_cast<Index>(id)) += 1.0;
    m.idf = ((1.0 + N) / (1.0 + df.array())).log() + 1.0;
  }
  std::vector<SparseRow> xs;
  xs.reserve(features.size());
  for (const auto& x : features) xs.push_back(weighted(x, m));

  switch (kind) {
    case BaselineKind::nb: {
      m.log_prior.resize(K);
      for (Index c = 0; c < K; ++c) m.log_prior(c) = std::log(static_cast<double>(per_class[static_cast<std::size_t>(c)]) / N);
      MatrixXd counts = MatrixXd::Zero(K, V);
      for (std::size_t i = 0; i < xs.size(); ++i)
        for (auto [id, v] : xs[i]) counts(static_cast<Index>(labels[i]), static_cast<Index>(id)) += v;
      // PAD can never occur, so it is not part of the event space.
      const double event_space = static_cast<double>(std::max<Index>(V - 1, 1));
      m.log_lik = MatrixXd::Zero(K, V);
      for (Index c = 0; c < K; ++c) {
        const double denom = counts.row(c).tail(V - 1).sum() + cfg.nb_alpha * event_space;
        for (Index j = 1; j < V; ++j) m.log_lik(c, j) = std::log((counts(c, j) + cfg.nb_alpha) / denom);
      }
      break;
    }
    case BaselineKind::logreg: {
      m.weights = MatrixXd::Zero(K, V);
      m.bias = VectorXd::Zero(K);
      for (std::size_t it = 0; it < cfg.logreg_iters; ++it) {
        auto obj = logreg_objective(m.weights, m.bias, xs, labels, cfg.logreg_l2);
        if (!std::isfinite(obj.value)) throw TrainingDiverged("logreg diverged");
        m.weights -= cfg.logreg_lr * obj.grad_w;
        m.bias -= cfg.logreg_lr * obj.grad_b;
      }
      break;
    }
    case BaselineKind::svm: {
      m.weights = MatrixXd::Zero(K, V);
      m.bias = VectorXd::Zero(K);
      const double lambda = 1.0 / (cfg.svm_c * N);
      std::vector<double> y(xs.size());
      for (Index c = 0; c < K; ++c) {
        for (std::size_t i = 0; i < xs.size(); ++i) y[i] = labels[i] == static_cast<std::size_t>(c) ? 1.0 : -1.0;
        VectorXd w = VectorXd::Zero(V);
        double b = 0.0;
        VectorXd best_w = w;
        double best_b = b;
        double best_obj = svm_objective(w, b, xs, y, lambda);
        for (std::size_t t = 1; t <= cfg.svm_iters; ++t) {
          VectorXd gw = lambda * w;
          double gb = 0.0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            double s = b;
            for (auto [id, v] : xs[i]) s += v * w(static_cast<Index>(id));
            if (y[i] * s < 1.0) {
              for (auto [id, v] : xs[i]) gw(static_cast<Index>(id)) -= y[i] * v / N;
              gb -= y[i] / N;
            }
          }
          const double eta = cfg.svm_eta0 / std::sqrt(static_cast<double>(t));
          w -= eta * gw;
          b -= eta * gb;
          const double obj = svm_objective(w, b, xs, y, lambda);
          if (!std::isfinite(obj)) throw TrainingDiverged("svm diverged");
          if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
            best_b = b;
          }
        }
        m.weights.row(c) = best_w.transpose();
        m.bias(c) = best_b;
      }
      break;
    }
    case BaselineKind::dtree: {
      detail::TreeBuilder tb{xs, labels, num_classes, num_features, cfg.tree_max_depth, cfg.tree_min_leaf, {}};
      std::vector<std::size_t> all(xs.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      tb.build(all, 0);
      m.nodes = std::move(tb.nodes);
      break;
    }
  }
  return m;
}

struct BaselinePrediction {
  std::size_t label = 0;
  VectorXd scores;
};

// Scores: nb joint log-likelihoods, logreg probabilities, svm raw margins,
// dtree leaf class proportions. Ties go to the lowest class index.
inline BaselinePrediction predict_baseline(const BaselineModel& m, const BowVector& x) {
  const auto row = weighted(x, m);
  BaselinePrediction out;
  switch (m.kind) {
    case BaselineKind::nb: {
      out.scores = m.log_prior;
      for (auto [id, v] : row) out.scores += v * m.log_lik.col(static_cast<Index>(id));
      break;
    }
    case BaselineKind::logreg:
      out.scores = detail::softmax(detail::sparse_affine(m.weights, m.bias, row));
      break;
    case BaselineKind::svm:
      out.scores = detail::sparse_affine(m.weights, m.bias, row);
      break;
    case BaselineKind::dtree: {
      std::size_t n = 0;
      while (m.nodes.at(n).feature >= 0) {
        const auto f = static_cast<std::size_t>(m.nodes[n].feature);
        double v = 0.0;
        for (auto [id, val] : row)
          if (id == f) v = val;
        n = static_cast<std::size_t>(v <= m.nodes[n].threshold ? m.nodes[n].left : m.nodes[n].right);
      }
      out.scores = Eigen::Map<const VectorXd>(m.nodes[n].class_probs.data(),
                                              static_cast<Index>(m.nodes[n].class_probs.size()));
      break;
    }
  }
  out.label = static_cast<std::size_t>(detail::argmax(out.scores));
  return out;
}

inline checkpoint::Container to_container(const BaselineModel& m, const textprep::Vocab& vocab,
                                          const nlohmann::json& extra = nlohmann::json::object()) {
  if (vocab.size() != m.num_features) throw DimensionError("baseline feature count differs from vocab size");
  checkpoint::Container c;
  c.manifest = extra;
  c.manifest["model_kind"] = to_string(m.kind);
  c.manifest["num_classes"] = m.num_classes;
  c.manifest["vocab_size"] = m.num_features;
  c.manifest["vocab_hash"] = vocab.content_hash();
  c.manifest["weighting"] = m.weighting == Weighting::counts ? "counts" : "tfidf";
  if (m.weighting == Weighting::tfidf) c.arrays.push_back(checkpoint::from_vector("idf", m.idf));
  switch (m.kind) {
    case BaselineKind::nb:
      c.arrays.push_back(checkpoint::from_vector("nb.log_prior", m.log_prior));
      c.arrays.push_back(checkpoint::from_matrix("nb.log_lik", m.log_lik));
      break;
    case BaselineKind::logreg:
    case BaselineKind::svm:
      c.arrays.push_back(checkpoint::from_matrix("linear.W", m.weights));
      c.arrays.push_back(checkpoint::from_vector("linear.b", m.bias));
      break;
    case BaselineKind::dtree: {
      nlohmann::json tree = nlohmann::json::array();
      for (const auto& n : m.nodes) {
        if (n.feature >= 0)
          tree.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
        else
          tree.push_back({{"class_probs", n.class_probs}});
      }
      c.manifest["tree"] = tree;
      break;
    }
  }
  return c;
}

inline BaselineModel baseline_from_container(const checkpoint::Container& c, const textprep::Vocab& vocab) {
  const auto& j = c.manifest;
  auto kind = baseline_kind_from_string(j.at("model_kind").get<std::string>());
  if (!kind) throw DataError("checkpoint is not a baseline model");
  if (j.at("vocab_hash").get<std::string>() != vocab.content_hash())
    throw DataError("checkpoint was trained with a different vocabulary");
  BaselineModel m;
  m.kind = *kind;
  m.num_classes = j.at("num_classes").get<std::size_t>();
  m.num_features = j.at("vocab_size").get<std::size_t>();
  if (m.num_features != vocab.size()) throw DataError("checkpoint vocab size mismatch");
  m.weighting = j.at("weighting").get<std::string>() == "tfidf" ? Weighting::tfidf : Weighting::counts;
  const auto K = static_cast<Index>(m.num_classes);
  const auto V = static_cast<Index>(m.num_features);
  if (m.weighting == Weighting::tfidf) m.idf = c.vector("idf", V);
  switch (m.kind) {
    case BaselineKind::nb:
      m.log_prior = c.vector("nb.log_prior", K);
      m.log_lik = c.matrix("nb.log_lik", K, V);
      break;
    case BaselineKind::logreg:
    case BaselineKind::svm:
      m.weights = c.matrix("linear.W", K, V);
      m.bias = c.vector("linear.b", K);
      break;
    case BaselineKind::dtree:
      for (const auto& n : j.at("tree")) {
        TreeNode node;
        if (n.contains("feature")) {
          node.feature = n.at("feature").get<std::int64_t>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<std::int64_t>();
          node.right = n.at("right").get<std::int64_t>();
        } else {
          node.class_probs = n.at("class_probs").get<std::vector<double>>();
          if (node.class_probs.size() != m.num_classes) throw DataError("tree leaf has wrong class count");
        }
        m.nodes.push_back(std::move(node));
      }
      for (const auto& n : m.nodes)
        if (n.feature >= 0 && (n.left < 0 || n.right < 0 || static_cast<std::size_t>(n.left) >= m.nodes.size() ||
                               static_cast<std::size_t>(n.right) >= m.nodes.size()))
          throw DataError("tree node child index out of range");
      if (m.nodes.empty()) throw DataError("tree has no nodes");
      break;
  }
  return m;
}

}  // namespace orgbin::baselines
