#pragma once

// Command-line driver. Exit codes: 0 success, 1 usage or config error,
// 2 data error, 3 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orgbin/baselines.hpp"
#include "orgbin/checkpoint.hpp"
#include "orgbin/common.hpp"
#include "orgbin/corpus.hpp"
#include "orgbin/embed.hpp"
#include "orgbin/entities.hpp"
#include "orgbin/eval/benchmark.hpp"
#include "orgbin/eval/metrics.hpp"
#include "orgbin/gold.hpp"
#include "orgbin/nn/serialize.hpp"
#include "orgbin/nn/train.hpp"
#include "orgbin/run_config.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw RuntimeFailure("cannot create output directory " + p.string());
  return p;
}

inline void require_path(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError(flag + " is required");
  if (!std::filesystem::exists(value)) throw ConfigError(flag + ": path does not exist: " + value);
}

// Finds --config before the app is built so file values become the
// defaults that explicit flags override.
inline std::optional<std::string> find_config_flag(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

inline nlohmann::json with_config(nlohmann::json j, const RunConfig& cfg) {
  j["run_config"] = cfg.to_json();
  return j;
}

// ---- subcommands ----------------------------------------------------------

inline int cmd_ingest(RunConfig& cfg, std::ostream& out) {
  if (cfg.store.empty()) throw ConfigError("--store is required");
  if (cfg.inputs.empty()) throw ConfigError("--input is required");
  for (const auto& in : cfg.inputs) require_path(in, "--input");
  corpus::CorpusStore store(cfg.store);
  corpus::IngestReport total;
  for (const auto& in : cfg.inputs) total += corpus::ingest_posts(in, store);
  out << with_config(total.to_json(), cfg).dump(2) << '\n';
  return kOk;
}

inline int cmd_stats(RunConfig& cfg, std::ostream& out, bool write_files) {
  require_path(cfg.store, "--store");
  corpus::CorpusStore store(cfg.store);
  auto stats = corpus::corpus_stats(store);
  if (write_files) {
    auto dir = ensure_dir(cfg.out);
    write_json(dir / "stats.json", with_config(stats.to_json(), cfg));
    write_text(dir / "stats.md", stats.to_markdown());
  }
  out << stats.to_markdown();
  return kOk;
}

inline entities::Gazetteer load_gazetteer(const RunConfig& cfg) {
  require_path(cfg.gazetteer, "--gazetteer");
  return entities::Gazetteer::from_csv(cfg.gazetteer);
}

inline int cmd_extract(RunConfig& cfg, std::ostream& out) {
  require_path(cfg.store, "--store");
  auto gaz = load_gazetteer(cfg);
  corpus::CorpusStore store(cfg.store);
  auto mentions = entities::extract_store(store, gaz);
  auto counts = entities::assign_bins(mentions, gaz);
  auto dir = ensure_dir(cfg.out);
  std::string lines;
  for (const auto& m : mentions) {
    auto j = m.to_json();
    j["bin"] = *gaz.bin_of(m.canonical_name);
    lines += j.dump() + "\n";
  }
  write_text(dir / "mentions.jsonl", lines);
  nlohmann::json report{{"mentions", mentions.size()}, {"bin_counts", counts}};
  write_json(dir / "bin_counts.json", with_config(report, cfg));
  out << report.dump(2) << '\n';
  return kOk;
}

inline int cmd_build_gold(RunConfig& cfg, std::ostream& out) {
  require_path(cfg.store, "--store");
  auto gaz = load_gazetteer(cfg);
  corpus::CorpusStore store(cfg.store);
  auto mentions = entities::extract_store(store, gaz);
  auto counts = entities::assign_bins(mentions, gaz);
  auto kept = entities::prune_bins(counts, cfg.min_bin);
  std::vector<std::pair<std::string, std::size_t>> ordered(kept.begin(), kept.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> retained_names;
  for (const auto& [bin, n] : ordered) retained_names.push_back(bin);
  std::vector<std::string> pruned;
  for (const auto& [bin, n] : counts)
    if (!kept.count(bin)) pruned.push_back(bin);
  std::vector<gold::GoldRecord> records;
  if (retained_names.empty()) {
    log::warn("build-gold: every bin has fewer than " + std::to_string(cfg.min_bin) + " mentions");
  } else {
    records = entities::build_gold_records(store, gaz, gold::BinSet(retained_names));
  }
  auto dir = ensure_dir(cfg.out);
  gold::write_gold(dir / "gold.jsonl", records);
  std::map<std::string, std::size_t> per_bin;
  for (const auto& r : records) ++per_bin[r.bin];
  nlohmann::json report{{"bin_counts", counts},
                        {"min_bin", cfg.min_bin},
                        {"retained_bins", retained_names},
                        {"pruned_bins", pruned},
                        {"records", records.size()},
                        {"records_per_bin", per_bin}};
  write_json(dir / "gold_report.json", with_config(report, cfg));
  out << report.dump(2) << '\n';
  return kOk;
}

inline std::shared_ptr<const embed::EmbeddingTable> maybe_embeddings(const RunConfig& cfg) {
  if (cfg.embeddings.empty()) return nullptr;
  require_path(cfg.embeddings, "--embeddings");
  return std::make_shared<const embed::EmbeddingTable>(embed::load_embeddings(cfg.embeddings));
}

inline int cmd_train(RunConfig& cfg, std::ostream& out) {
  require_path(cfg.gold, "--gold");
  if (!eval::is_known_model_kind(cfg.model)) throw ConfigError("--model: unknown model '" + cfg.model + "'");
  auto ds = gold::load_gold(cfg.gold, gold::BinSet(cfg.bins));
  if (ds.num_classes() < 2) throw DataError("gold set needs at least two classes to train");
  auto vocab = textprep::build_vocab(ds.token_sequences(), cfg.min_freq);
  auto dir = ensure_dir(cfg.out);
  nlohmann::json manifest{{"classes", ds.classes}, {"run_config", cfg.to_json()}, {"maxlen", cfg.maxlen}};
  std::vector<std::size_t> preds;
  nlohmann::json report;
  checkpoint::Container ckpt;
  if (auto bk = baselines::baseline_kind_from_string(cfg.model)) {
    std::vector<baselines::BowVector> xs;
    for (const auto& r : ds.records) xs.push_back(baselines::featurize_bow(r.tokens, vocab));
    auto model = baselines::train_baseline(*bk, xs, ds.labels, ds.num_classes(), vocab.size(), cfg.baseline, cfg.seed);
    for (const auto& x : xs) preds.push_back(baselines::predict_baseline(model, x).label);
    ckpt = baselines::to_container(model, vocab, manifest);
  } else {
    auto kind = *nn::model_kind_from_string(cfg.model);
    auto table = maybe_embeddings(cfg);
    const embed::EmbeddingTable empty(cfg.embed_dim);
    auto emb = embed::build_matrix(vocab, table ? *table : empty, derive_seed(cfg.seed, "embedding"), cfg.init_range);
    emb.trainable = !cfg.freeze_embeddings;
    std::vector<nn::LabeledExample> data;
    for (std::size_t i = 0; i < ds.size(); ++i)
      data.push_back({textprep::encode_pad(ds.records[i].tokens, vocab, cfg.maxlen), static_cast<nn::Index>(ds.labels[i])});
    auto res = nn::train(kind, emb, data, static_cast<nn::Index>(ds.num_classes()), cfg.train);
    for (const auto& d : data) preds.push_back(static_cast<std::size_t>(nn::predict(res.model, d.example).label));
    report["loss_curve"] = res.loss_curve;
    report["embedding_coverage"] = emb.coverage;
    ckpt = nn::to_container(res.model, vocab, manifest);
  }
  checkpoint::save(dir / "model.ckpt", ckpt);
  vocab.save(dir / "vocab.json");
  auto cm = eval::confusion(preds, ds.labels, ds.num_classes());
  report["model"] = cfg.model;
  report["classes"] = ds.classes;
  report["class_counts"] = ds.counts;
  report["records"] = ds.size();
  report["vocab_size"] = vocab.size();
  report["training_metrics"] = eval::metrics(cm).to_json();
  report["rejected_records"] = ds.rejections.size();
  write_json(dir / "train_report.json", with_config(report, cfg));
  out << report.dump(2) << '\n';
  return kOk;
}

inline int cmd_evaluate(RunConfig& cfg, std::ostream& out) {
  require_path(cfg.checkpoint, "--checkpoint");
  require_path(cfg.vocab, "--vocab");
  require_path(cfg.gold, "--gold");
  auto vocab = textprep::Vocab::load(cfg.vocab);
  auto ckpt = checkpoint::load(cfg.checkpoint);
  const auto classes = ckpt.manifest.at("classes").get<std::vector<std::string>>();
  const auto maxlen = ckpt.manifest.value("maxlen", cfg.maxlen);
  const std::string kind = ckpt.manifest.at("model_kind").get<std::string>();
  gold::BinSet bins(classes);
  auto ds = gold::load_gold(cfg.gold, bins);
  std::vector<std::size_t> golds, preds;
  for (const auto& r : ds.records) golds.push_back(*bins.index_of(r.bin));
  if (baselines::baseline_kind_from_string(kind)) {
    auto model = baselines::baseline_from_container(ckpt, vocab);
    for (const auto& r : ds.records) preds.push_back(baselines::predict_baseline(model, baselines::featurize_bow(r.tokens, vocab)).label);
  } else {
    auto model = nn::from_container(ckpt, vocab);
    for (const auto& r : ds.records)
      preds.push_back(static_cast<std::size_t>(nn::predict(model, textprep::encode_pad(r.tokens, vocab, maxlen)).label));
  }
  auto cm = eval::confusion(preds, golds, classes.size());
  nlohmann::json report{{"model", kind},
                        {"classes", classes},
                        {"records", ds.size()},
                        {"rejected_records", ds.rejections.size()},
                        {"metrics", eval::metrics(cm).to_json()},
                        {"confusion", cm.to_json()},
                        {"averaging", eval::kAveragingNote}};
  auto dir = ensure_dir(cfg.out);
  write_json(dir / "eval_report.json", with_config(report, cfg));
  out << report.dump(2) << '\n';
  return kOk;
}

inline int cmd_benchmark(RunConfig& cfg, std::ostream& out) {
  require_path(cfg.gold, "--gold");
  std::vector<eval::ModelSpec> specs;
  for (const auto& m : cfg.models) {
    if (!eval::is_known_model_kind(m)) throw ConfigError("--models: unknown model '" + m + "'");
    specs.push_back({m, m});
  }
  auto ds = gold::load_gold(cfg.gold, gold::BinSet(cfg.bins));
  auto bcfg = cfg.benchmark_config();
  bcfg.embeddings = maybe_embeddings(cfg);
  auto report = eval::run_benchmark(ds, specs, bcfg, cfg.to_json());
  auto dir = ensure_dir(cfg.out);
  write_json(dir / "report.json", report.to_json());
  write_text(dir / "report.md", report.to_markdown());
  out << report.to_markdown();
  return kOk;
}

// ---- option wiring --------------------------------------------------------

inline void add_common(CLI::App& sub, RunConfig& cfg, std::string& config_path, bool& verbose) {
  sub.add_option("--config", config_path, "JSON config file (or an artifact with run_config); flags override it");
  sub.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sub.add_flag("--verbose,-v", verbose, "Log progress to stderr");
}

inline void add_out(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--out", cfg.out, "Output directory")->capture_default_str();
}

inline void add_preprocessing(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--maxlen", cfg.maxlen, "Padded sequence length")->capture_default_str();
  sub.add_option("--min-freq", cfg.min_freq, "Minimum token frequency for the vocabulary")->capture_default_str();
  sub.add_option("--bins", cfg.bins, "Declared bin labels, comma separated")->delimiter(',')->capture_default_str();
}

inline void add_training(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--embeddings", cfg.embeddings, "Pre-trained word vectors (GloVe text format)");
  sub.add_option("--embed-dim", cfg.embed_dim, "Embedding dimension when no vectors are given")->capture_default_str();
  sub.add_option("--init-range", cfg.init_range, "Uniform init range for rows missing from the vectors")->capture_default_str();
  sub.add_flag("--freeze-embeddings", cfg.freeze_embeddings, "Keep embedding rows fixed during training");
  sub.add_option("--epochs", cfg.train.epochs, "Training epochs")->capture_default_str();
  sub.add_option("--batch-size", cfg.train.batch_size, "Mini-batch size")->capture_default_str();
  sub.add_option("--lr", cfg.train.learning_rate, "Learning rate")->capture_default_str();
  sub.add_option("--optimizer", cfg.optimizer, "adam or sgd")->capture_default_str();
  sub.add_option("--clip", cfg.train.clip_norm, "Global gradient-norm clip (0 disables)")->capture_default_str();
  sub.add_option("--patience", cfg.train.patience, "Early-stop patience in epochs (0 disables)")->capture_default_str();
  sub.add_option("--hidden", cfg.train.hidden_dim, "Recurrent hidden size")->capture_default_str();
  sub.add_option("--weighting", cfg.weighting, "Bag-of-words weighting: counts or tfidf")->capture_default_str();
  sub.add_option("--nb-alpha", cfg.baseline.nb_alpha, "Naive Bayes smoothing")->capture_default_str();
  sub.add_option("--logreg-l2", cfg.baseline.logreg_l2, "Logistic regression L2 penalty")->capture_default_str();
  sub.add_option("--logreg-lr", cfg.baseline.logreg_lr, "Logistic regression step size")->capture_default_str();
  sub.add_option("--logreg-iters", cfg.baseline.logreg_iters, "Logistic regression iterations")->capture_default_str();
  sub.add_option("--svm-c", cfg.baseline.svm_c, "SVM C")->capture_default_str();
  sub.add_option("--svm-eta0", cfg.baseline.svm_eta0, "SVM initial step size")->capture_default_str();
  sub.add_option("--svm-iters", cfg.baseline.svm_iters, "SVM iterations")->capture_default_str();
  sub.add_option("--tree-max-depth", cfg.baseline.tree_max_depth, "Decision tree depth limit")->capture_default_str();
  sub.add_option("--tree-min-leaf", cfg.baseline.tree_min_leaf, "Decision tree minimum leaf size")->capture_default_str();
}

}  // namespace detail

// Runs one CLI invocation; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  RunConfig cfg;
  try {
    if (auto path = detail::find_config_flag(args)) cfg.merge(RunConfig::read_file(*path));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  CLI::App app{"Label hacker-forum exploit posts with the organization type they target", "orgbin"};
  app.require_subcommand(1);
  std::string config_path;
  bool verbose = false;

  auto* ingest = app.add_subcommand("ingest", "Add post dumps to the corpus store");
  detail::add_common(*ingest, cfg, config_path, verbose);
  ingest->add_option("--store", cfg.store, "Corpus store directory");
  ingest->add_option("--input", cfg.inputs, "Post dump (JSON lines); repeatable");

  auto* stats = app.add_subcommand("stats", "Per-forum corpus statistics");
  detail::add_common(*stats, cfg, config_path, verbose);
  stats->add_option("--store", cfg.store, "Corpus store directory");
  auto* stats_out = stats->add_option("--out", cfg.out, "Also write stats.json and stats.md here")->capture_default_str();

  auto* extract = app.add_subcommand("extract", "Extract organization mentions from the store");
  detail::add_common(*extract, cfg, config_path, verbose);
  extract->add_option("--store", cfg.store, "Corpus store directory");
  extract->add_option("--gazetteer", cfg.gazetteer, "Gazetteer CSV (canonical_name,aliases,bin)");
  detail::add_out(*extract, cfg);

  auto* build = app.add_subcommand("build-gold", "Bin mentions, prune sparse bins and write gold records");
  detail::add_common(*build, cfg, config_path, verbose);
  build->add_option("--store", cfg.store, "Corpus store directory");
  build->add_option("--gazetteer", cfg.gazetteer, "Gazetteer CSV (canonical_name,aliases,bin)");
  build->add_option("--min-bin", cfg.min_bin, "Drop bins with fewer mentions than this")->capture_default_str();
  detail::add_out(*build, cfg);

  auto* train = app.add_subcommand("train", "Train one model on a gold file");
  detail::add_common(*train, cfg, config_path, verbose);
  train->add_option("--gold", cfg.gold, "Gold records (JSON lines)");
  train->add_option("--model", cfg.model, "nb, logreg, dtree, svm, rnn, gru, lstm or bilstm")->capture_default_str();
  detail::add_preprocessing(*train, cfg);
  detail::add_training(*train, cfg);
  detail::add_out(*train, cfg);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained model on a held-out gold file");
  detail::add_common(*evaluate, cfg, config_path, verbose);
  evaluate->add_option("--checkpoint", cfg.checkpoint, "model.ckpt written by train");
  evaluate->add_option("--vocab", cfg.vocab, "vocab.json written by train");
  evaluate->add_option("--gold", cfg.gold, "Held-out gold records (JSON lines)");
  evaluate->add_option("--maxlen", cfg.maxlen, "Padded length if the checkpoint does not record one")->capture_default_str();
  detail::add_out(*evaluate, cfg);

  auto* bench = app.add_subcommand("benchmark", "Stratified k-fold benchmark of all models with t-tests");
  detail::add_common(*bench, cfg, config_path, verbose);
  bench->add_option("--gold", cfg.gold, "Gold records (JSON lines)");
  bench->add_option("--folds", cfg.folds, "Number of folds")->capture_default_str();
  bench->add_option("--models", cfg.models, "Models to run, comma separated")->delimiter(',')->capture_default_str();
  bench->add_option("--champion", cfg.champion, "Model the t-tests compare against")->capture_default_str();
  bench->add_option("--jobs", cfg.jobs, "Parallel fold x model jobs")->capture_default_str();
  detail::add_preprocessing(*bench, cfg);
  detail::add_training(*bench, cfg);
  detail::add_out(*bench, cfg);

  std::vector<std::string> argv_storage{"orgbin"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  const bool prev_verbose = log::verbose();
  log::verbose() = verbose || prev_verbose;
  int code = kOk;
  try {
    cfg.resolve();
    if (ingest->parsed()) code = detail::cmd_ingest(cfg, out);
    else if (stats->parsed()) code = detail::cmd_stats(cfg, out, stats_out->count() > 0);
    else if (extract->parsed()) code = detail::cmd_extract(cfg, out);
    else if (build->parsed()) code = detail::cmd_build_gold(cfg, out);
    else if (train->parsed()) code = detail::cmd_train(cfg, out);
    else if (evaluate->parsed()) code = detail::cmd_evaluate(cfg, out);
    else if (bench->parsed()) code = detail::cmd_benchmark(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    code = kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    code = kData;
  } catch (const Error& e) {
    err << "runtime failure: " << e.what() << '\n';
    code = kRuntime;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << '\n';
    code = kData;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    code = kRuntime;
  }
  log::verbose() = prev_verbose;
  return code;
}

}  // namespace orgbin::cli
