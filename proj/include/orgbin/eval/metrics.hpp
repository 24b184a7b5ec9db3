#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "orgbin/common.hpp"

namespace orgbin::eval {

// Rows are gold classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k = 0) : k_(k), cells_(k * k, 0) {}

  std::size_t num_classes() const { return k_; }

  std::size_t at(std::size_t gold, std::size_t pred) const { return cells_.at(gold * k_ + pred); }
  std::size_t& at(std::size_t gold, std::size_t pred) { return cells_.at(gold * k_ + pred); }

  void add(std::size_t gold, std::size_t pred) { ++at(gold, pred); }

  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : cells_) t += c;
    return t;
  }

  std::size_t trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < k_; ++i) t += at(i, i);
    return t;
  }

  std::size_t row_sum(std::size_t gold) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < k_; ++j) s += at(gold, j);
    return s;
  }

  std::size_t col_sum(std::size_t pred) const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) s += at(i, pred);
    return s;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    if (o.k_ != k_) throw DimensionError("confusion matrices differ in class count");
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += o.cells_[i];
    return *this;
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < k_; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < k_; ++j) row.push_back(at(i, j));
      rows.push_back(row);
    }
    return rows;
  }

 private:
  std::size_t k_;
  std::vector<std::size_t> cells_;
};

inline ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                                 std::size_t num_classes) {
  if (preds.size() != golds.size()) throw DataError("confusion: predictions and golds differ in length");
  if (preds.empty()) throw DataError("confusion: no examples");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= num_classes || golds[i] >= num_classes)
      throw DataError("confusion: class index out of range at position " + std::to_string(i));
    cm.add(golds[i], preds[i]);
  }
  return cm;
}

// One-vs-rest view of a single class.
struct ClassMetrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t c) {
  ClassMetrics m;
  const std::size_t total = cm.total();
  m.tp = cm.at(c, c);
  m.fp = cm.col_sum(c) - m.tp;
  m.fn = cm.row_sum(c) - m.tp;
  m.tn = total - m.tp - m.fp - m.fn;
  m.accuracy = safe_ratio(static_cast<double>(m.tp + m.tn), static_cast<double>(total));
  m.precision = safe_ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
  m.recall = safe_ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
  m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  nlohmann::json to_json() const {
    return {{"accuracy", accuracy}, {"f1", f1}, {"precision", precision}, {"recall", recall}};
  }
};

// Accuracy is trace / total. Precision, recall and F1 are unweighted means of
// the per-class values over classes that occur in the gold labels; F1 is
// averaged per class, not recomputed from the averaged precision and recall.
inline Metrics metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw DataError("metrics: empty confusion matrix");
  Metrics m;
  m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  std::size_t present = 0;
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    if (cm.row_sum(c) == 0) continue;
    ++present;
    auto cmx = class_metrics(cm, c);
    m.precision += cmx.precision;
    m.recall += cmx.recall;
    m.f1 += cmx.f1;
  }
  m.precision /= static_cast<double>(present);
  m.recall /= static_cast<double>(present);
  m.f1 /= static_cast<double>(present);
  return m;
}

}  // namespace orgbin::eval
