#pragma once

// k-fold benchmark of bag-of-words baselines and recurrent models on a gold
// dataset, with paired one-tailed t-tests against a champion model.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "orgbin/baselines.hpp"
#include "orgbin/common.hpp"
#include "orgbin/embed.hpp"
#include "orgbin/eval/kfold.hpp"
#include "orgbin/eval/metrics.hpp"
#include "orgbin/eval/student_t.hpp"
#include "orgbin/gold.hpp"
#include "orgbin/nn/model.hpp"
#include "orgbin/nn/train.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::eval {

// Table order: classical models first, then recurrent ones.
inline const std::vector<std::string>& all_model_kinds() {
  static const std::vector<std::string> kinds{"nb", "logreg", "dtree", "svm", "rnn", "gru", "lstm", "bilstm"};
  return kinds;
}

inline bool is_known_model_kind(const std::string& kind) {
  const auto& k = all_model_kinds();
  return std::find(k.begin(), k.end(), kind) != k.end();
}

inline bool is_sequence_kind(const std::string& kind) {
  return nn::model_kind_from_string(kind).has_value();
}

inline std::string display_name(const std::string& kind) {
  if (kind == "nb") return "Naïve Bayes";
  if (kind == "logreg") return "Logistic Regression";
  if (kind == "dtree") return "Decision Tree";
  if (kind == "svm") return "SVM";
  if (kind == "rnn") return "RNN";
  if (kind == "gru") return "GRU";
  if (kind == "lstm") return "LSTM";
  if (kind == "bilstm") return "BiLSTM";
  return kind;
}

struct ModelSpec {
  std::string name;  // row label; defaults to the kind
  std::string kind;
};

struct BenchmarkConfig {
  std::size_t folds = kDefaultFolds;
  std::uint64_t seed = 0;
  std::size_t maxlen = textprep::kDefaultMaxLen;
  std::size_t min_freq = textprep::kDefaultMinFreq;
  std::size_t embed_dim = embed::kDefaultDim;
  double init_range = embed::kDefaultInitRange;
  bool freeze_embeddings = false;
  nn::TrainConfig train;
  baselines::BaselineConfig baseline;
  std::string champion = "bilstm";
  std::size_t jobs = 1;  // scheduling only; never affects results
  std::shared_ptr<const embed::EmbeddingTable> embeddings;

  void validate() const {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (maxlen < 1) throw ConfigError("maxlen must be >= 1");
    if (min_freq < 1) throw ConfigError("min_freq must be >= 1");
    if (!embeddings && embed_dim < 1) throw ConfigError("embedding dim must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    train.validate();
    baseline.validate();
  }
};

struct ModelRow {
  ModelSpec spec;
  std::vector<Metrics> folds;
  std::vector<ConfusionMatrix> confusions;
  Metrics mean;
  std::optional<std::string> failure;
};

struct Comparison {
  std::string model;  // row name
  TTestResult accuracy, f1, precision, recall;
};

struct BenchmarkReport {
  nlohmann::json run_config = nlohmann::json::object();
  std::string plan_hash;
  std::size_t folds = 0;
  std::vector<std::size_t> fold_sizes;
  std::vector<std::string> classes;
  std::vector<std::size_t> class_counts;
  std::string champion;
  std::vector<ModelRow> rows;
  std::vector<Comparison> comparisons;

  const ModelRow* row(const std::string& name) const {
    for (const auto& r : rows)
      if (r.spec.name == name) return &r;
    return nullptr;
  }

  const Comparison* comparison(const std::string& name) const {
    for (const auto& c : comparisons)
      if (c.model == name) return &c;
    return nullptr;
  }

  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

inline constexpr std::string_view kAveragingNote =
    "accuracy = trace/total (micro); precision, recall and F1-score are unweighted macro averages "
    "over gold classes, with F1 computed per class before averaging";

namespace detail {

inline nlohmann::json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json ttest_json(const TTestResult& r) {
  return {{"t", number_or_string(r.t)}, {"p", number_or_string(r.p)}, {"stars", significance_stars(r.p)}};
}

struct FoldOutcome {
  Metrics metrics;
  ConfusionMatrix confusion;
};

inline FoldOutcome run_fold(const gold::GoldDataset& ds, const FoldPlan& plan, std::size_t fold,
                            const ModelSpec& spec, const BenchmarkConfig& cfg) {
  const auto train_idx = plan.train_indices(fold);
  const auto& test_idx = plan.folds[fold];
  std::vector<textprep::TokenSequence> train_tokens;
  train_tokens.reserve(train_idx.size());
  for (auto i : train_idx) train_tokens.push_back(ds.records[i].tokens);
  const auto vocab = textprep::build_vocab(train_tokens, cfg.min_freq);
  const std::size_t K = ds.num_classes();
  const std::uint64_t job_seed = derive_seed(cfg.seed, spec.kind, fold);
  std::vector<std::size_t> preds, golds;
  if (auto bk = baselines::baseline_kind_from_string(spec.kind)) {
    std::vector<baselines::BowVector> xs;
    std::vector<std::size_t> ys;
    for (auto i : train_idx) {
      xs.push_back(baselines::featurize_bow(ds.records[i].tokens, vocab));
      ys.push_back(ds.labels[i]);
    }
    auto model = baselines::train_baseline(*bk, xs, ys, K, vocab.size(), cfg.baseline, job_seed);
    for (auto i : test_idx) {
      preds.push_back(baselines::predict_baseline(model, baselines::featurize_bow(ds.records[i].tokens, vocab)).label);
      golds.push_back(ds.labels[i]);
    }
  } else {
    auto kind = nn::model_kind_from_string(spec.kind);
    if (!kind) throw ConfigError("unknown model kind '" + spec.kind + "'");
    const embed::EmbeddingTable empty(cfg.embed_dim);
    const embed::EmbeddingTable& table = cfg.embeddings ? *cfg.embeddings : empty;
    auto emb = embed::build_matrix(vocab, table, derive_seed(cfg.seed, "embedding", fold), cfg.init_range);
    emb.trainable = !cfg.freeze_embeddings;
    std::vector<nn::LabeledExample> train_set;
    train_set.reserve(train_idx.size());
    for (auto i : train_idx)
      train_set.push_back({textprep::encode_pad(ds.records[i].tokens, vocab, cfg.maxlen),
                           static_cast<nn::Index>(ds.labels[i])});
    nn::TrainConfig tc = cfg.train;
    tc.seed = job_seed;
    auto trained = nn::train(*kind, emb, train_set, static_cast<nn::Index>(K), tc);
    for (auto i : test_idx) {
      auto pred = nn::predict(trained.model, textprep::encode_pad(ds.records[i].tokens, vocab, cfg.maxlen));
      preds.push_back(static_cast<std::size_t>(pred.label));
      golds.push_back(ds.labels[i]);
    }
  }
  FoldOutcome out{{}, confusion(preds, golds, K)};
  out.metrics = metrics(out.confusion);
  return out;
}

inline Metrics mean_of(const std::vector<Metrics>& ms) {
  Metrics m;
  for (const auto& x : ms) {
    m.accuracy += x.accuracy;
    m.precision += x.precision;
    m.recall += x.recall;
    m.f1 += x.f1;
  }
  const double n = static_cast<double>(ms.size());
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

template <typename Get>
std::vector<double> column(const ModelRow& r, Get get) {
  std::vector<double> v;
  for (const auto& m : r.folds) v.push_back(get(m));
  return v;
}

}  // namespace detail

// Trains and evaluates every model on every fold of one shared plan. A model
// whose training fails on any fold becomes a failure row; the run continues.
inline BenchmarkReport run_benchmark(const gold::GoldDataset& ds, const std::vector<ModelSpec>& models,
                                     const BenchmarkConfig& cfg,
                                     const nlohmann::json& run_config = nlohmann::json::object()) {
  cfg.validate();
  if (models.empty()) throw ConfigError("benchmark: model list is empty");
  for (const auto& m : models)
    if (!is_known_model_kind(m.kind)) throw ConfigError("benchmark: unknown model kind '" + m.kind + "'");
  if (ds.num_classes() < 2) throw DataError("benchmark: gold set needs at least two classes");

  const FoldPlan plan = stratified_kfold(ds, cfg.folds, cfg.seed);
  BenchmarkReport report;
  report.run_config = run_config;
  report.plan_hash = plan.hash();
  report.folds = plan.k();
  for (const auto& f : plan.folds) report.fold_sizes.push_back(f.size());
  report.classes = ds.classes;
  report.class_counts = ds.counts;
  report.champion = cfg.champion;

  const std::size_t k = plan.k();
  const std::size_t njobs = models.size() * k;
  std::vector<std::optional<detail::FoldOutcome>> outcomes(njobs);
  std::vector<std::string> errors(njobs);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < njobs; j = next++) {
      const auto& spec = models[j / k];
      const std::size_t fold = j % k;
      const auto start = std::chrono::steady_clock::now();
      try {
        outcomes[j] = detail::run_fold(ds, plan, fold, spec, cfg);
      } catch (const Error& e) {
        errors[j] = e.what();
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::lock_guard lock(log_mutex);
      char buf[64];
      std::snprintf(buf, sizeof buf, " fold %zu/%zu %.2fs", fold + 1, k, secs);
      log::info("benchmark " + spec.name + buf + (errors[j].empty() ? "" : " FAILED: " + errors[j]));
    }
  };
  const std::size_t nthreads = std::min(cfg.jobs, njobs);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < nthreads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    ModelRow row;
    row.spec = models[mi];
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t j = mi * k + f;
      if (!outcomes[j]) {
        if (!row.failure) row.failure = "fold " + std::to_string(f + 1) + ": " + errors[j];
        continue;
      }
      row.folds.push_back(outcomes[j]->metrics);
      row.confusions.push_back(outcomes[j]->confusion);
    }
    if (!row.failure) row.mean = detail::mean_of(row.folds);
    report.rows.push_back(std::move(row));
  }

  const ModelRow* champ = nullptr;
  for (const auto& r : report.rows)
    if (!r.failure && (r.spec.name == cfg.champion || (!champ && r.spec.kind == cfg.champion))) champ = &r;
  if (champ) {
    for (const auto& r : report.rows) {
      if (&r == champ || r.failure) continue;
      Comparison c;
      c.model = r.spec.name;
      auto test = [&](auto get) {
        auto a = detail::column(*champ, get);
        auto b = detail::column(r, get);
        return paired_ttest(a, b);
      };
      c.accuracy = test([](const Metrics& m) { return m.accuracy; });
      c.f1 = test([](const Metrics& m) { return m.f1; });
      c.precision = test([](const Metrics& m) { return m.precision; });
      c.recall = test([](const Metrics& m) { return m.recall; });
      report.comparisons.push_back(c);
    }
    report.champion = champ->spec.name;
  }
  return report;
}

inline nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json j;
  j["run_config"] = run_config;
  j["averaging"] = kAveragingNote;
  j["significance"] = "one-tailed paired t-test over folds, champion greater than row model; "
                      "* p<0.05, ** p<0.01, *** p<0.001";
  j["champion"] = champion;
  j["plan_hash"] = plan_hash;
  j["folds"] = folds;
  j["fold_sizes"] = fold_sizes;
  j["classes"] = classes;
  j["class_counts"] = class_counts;
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"name", r.spec.name}, {"kind", r.spec.kind}, {"plan_hash", plan_hash}};
    if (r.failure) {
      row["failure"] = *r.failure;
    } else {
      row["mean"] = r.mean.to_json();
      nlohmann::json per_fold = nlohmann::json::array();
      for (std::size_t f = 0; f < r.folds.size(); ++f) {
        auto fj = r.folds[f].to_json();
        fj["fold"] = f;
        fj["confusion"] = r.confusions[f].to_json();
        per_fold.push_back(fj);
      }
      row["folds"] = per_fold;
    }
    if (const auto* c = comparison(r.spec.name)) {
      row["vs_champion"] = {{"accuracy", detail::ttest_json(c->accuracy)},
                            {"f1", detail::ttest_json(c->f1)},
                            {"precision", detail::ttest_json(c->precision)},
                            {"recall", detail::ttest_json(c->recall)}};
    }
    rows_json.push_back(row);
  }
  j["rows"] = rows_json;
  return j;
}

inline std::string BenchmarkReport::to_markdown() const {
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
    return std::string(buf);
  };
  using Get = double (*)(const Metrics&);
  const std::vector<std::pair<std::string, Get>> columns{
      {"Accuracy", [](const Metrics& m) { return m.accuracy; }},
      {"F1-Score", [](const Metrics& m) { return m.f1; }},
      {"Precision", [](const Metrics& m) { return m.precision; }},
      {"Recall", [](const Metrics& m) { return m.recall; }},
  };
  std::vector<double> best(columns.size(), -1.0);
  for (const auto& r : rows) {
    if (r.failure) continue;
    for (std::size_t c = 0; c < columns.size(); ++c) best[c] = std::max(best[c], columns[c].second(r.mean));
  }
  std::string md;
  md += "Averaging: " + std::string(kAveragingNote) + ".\n";
  md += std::to_string(folds) + "-fold stratified cross-validation, plan " + plan_hash + ".\n\n";
  md += "| Type | Model | Accuracy | F1-Score | Precision | Recall |\n";
  md += "|---|---|---|---|---|---|\n";
  std::string last_type;
  for (const auto& r : rows) {
    const std::string type = is_sequence_kind(r.spec.kind) ? "Deep Learning" : "Classical Machine Learning";
    std::string name = r.spec.name == r.spec.kind ? display_name(r.spec.kind) : r.spec.name;
    md += "| " + (type == last_type ? std::string() : type) + " | " + name + " |";
    last_type = type;
    if (r.failure) {
      md += " failed | failed | failed | failed |\n";
      continue;
    }
    const auto* cmp = comparison(r.spec.name);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const double v = columns[c].second(r.mean);
      std::string cell = v == best[c] ? "**" + pct(v) + "**" : pct(v);
      if (cmp) {
        const TTestResult* t = c == 0 ? &cmp->accuracy : c == 1 ? &cmp->f1 : c == 2 ? &cmp->precision : &cmp->recall;
        const auto stars = significance_stars(t->p);
        if (!stars.empty()) cell += " " + stars;
      }
      md += " " + cell + " |";
    }
    md += "\n";
  }
  md += "\n* indicates a significant difference from " +
        (champion.empty() ? std::string("the champion") : display_name(champion)) +
        " at p < 0.05, ** at p < 0.01, and *** at p < 0.001 (one-tailed paired t-test over folds).\n";
  return md;
}

}  // namespace orgbin::eval
