#pragma once

// Resolved settings of one CLI run. Every artifact embeds the echo of this
// config; feeding an artifact back through --config reproduces it.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orgbin/baselines.hpp"
#include "orgbin/common.hpp"
#include "orgbin/embed.hpp"
#include "orgbin/eval/benchmark.hpp"
#include "orgbin/gold.hpp"
#include "orgbin/nn/train.hpp"
#include "orgbin/textprep.hpp"

namespace orgbin {

struct RunConfig {
  std::uint64_t seed = 0;

  std::string store;
  std::vector<std::string> inputs;
  std::string gazetteer;
  std::string embeddings;
  std::string gold;
  std::string checkpoint;
  std::string vocab;
  std::string out = ".";  // not echoed: output location never changes content

  std::size_t maxlen = textprep::kDefaultMaxLen;
  std::size_t min_freq = textprep::kDefaultMinFreq;
  std::vector<std::string> bins = gold::default_bins().names();

  std::string model = "bilstm";
  std::vector<std::string> models = eval::all_model_kinds();
  std::string champion = "bilstm";
  std::size_t embed_dim = embed::kDefaultDim;
  double init_range = embed::kDefaultInitRange;
  bool freeze_embeddings = false;
  nn::TrainConfig train;
  std::string optimizer = "adam";
  baselines::BaselineConfig baseline;
  std::string weighting = "counts";

  std::size_t folds = eval::kDefaultFolds;
  std::size_t min_bin = 100;
  std::size_t jobs = 1;  // not echoed: scheduling only

  // Copies string-typed choices into their typed fields and checks ranges.
  void resolve() {
    train.optimizer = nn::optimizer_from_string(optimizer);
    if (weighting == "counts")
      baseline.weighting = baselines::Weighting::counts;
    else if (weighting == "tfidf")
      baseline.weighting = baselines::Weighting::tfidf;
    else
      throw ConfigError("weighting must be 'counts' or 'tfidf'");
    train.seed = seed;
    train.validate();
    baseline.validate();
    if (maxlen < 1) throw ConfigError("maxlen must be >= 1");
    if (min_freq < 1) throw ConfigError("min-freq must be >= 1");
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (embed_dim < 1) throw ConfigError("embed-dim must be >= 1");
    if (!(init_range > 0.0)) throw ConfigError("init-range must be > 0");
    gold::BinSet check(bins);
    if (check.empty()) throw ConfigError("bin set is empty");
  }

  nlohmann::json to_json() const {
    return {
        {"seed", seed},
        {"store", store},
        {"inputs", inputs},
        {"gazetteer", gazetteer},
        {"embeddings", embeddings},
        {"gold", gold},
        {"checkpoint", checkpoint},
        {"vocab", vocab},
        {"maxlen", maxlen},
        {"min_freq", min_freq},
        {"bins", bins},
        {"model", model},
        {"models", models},
        {"champion", champion},
        {"embed_dim", embed_dim},
        {"init_range", init_range},
        {"freeze_embeddings", freeze_embeddings},
        {"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"learning_rate", train.learning_rate},
        {"optimizer", optimizer},
        {"clip_norm", train.clip_norm},
        {"patience", train.patience},
        {"hidden_dim", train.hidden_dim},
        {"weighting", weighting},
        {"nb_alpha", baseline.nb_alpha},
        {"logreg_l2", baseline.logreg_l2},
        {"logreg_lr", baseline.logreg_lr},
        {"logreg_iters", baseline.logreg_iters},
        {"svm_c", baseline.svm_c},
        {"svm_eta0", baseline.svm_eta0},
        {"svm_iters", baseline.svm_iters},
        {"tree_max_depth", baseline.tree_max_depth},
        {"tree_min_leaf", baseline.tree_min_leaf},
        {"folds", folds},
        {"min_bin", min_bin},
    };
  }

  // Overlays the keys present in `j`; unknown keys are an error.
  void merge(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      try {
        if (k == "seed") seed = v.get<std::uint64_t>();
        else if (k == "store") store = v.get<std::string>();
        else if (k == "inputs") inputs = v.get<std::vector<std::string>>();
        else if (k == "gazetteer") gazetteer = v.get<std::string>();
        else if (k == "embeddings") embeddings = v.get<std::string>();
        else if (k == "gold") gold = v.get<std::string>();
        else if (k == "checkpoint") checkpoint = v.get<std::string>();
        else if (k == "vocab") vocab = v.get<std::string>();
        else if (k == "out") out = v.get<std::string>();
        else if (k == "maxlen") maxlen = v.get<std::size_t>();
        else if (k == "min_freq") min_freq = v.get<std::size_t>();
        else if (k == "bins") bins = v.get<std::vector<std::string>>();
        else if (k == "model") model = v.get<std::string>();
        else if (k == "models") models = v.get<std::vector<std::string>>();
        else if (k == "champion") champion = v.get<std::string>();
        else if (k == "embed_dim") embed_dim = v.get<std::size_t>();
        else if (k == "init_range") init_range = v.get<double>();
        else if (k == "freeze_embeddings") freeze_embeddings = v.get<bool>();
        else if (k == "epochs") train.epochs = v.get<std::size_t>();
        else if (k == "batch_size") train.batch_size = v.get<std::size_t>();
        else if (k == "learning_rate") train.learning_rate = v.get<double>();
        else if (k == "optimizer") optimizer = v.get<std::string>();
        else if (k == "clip_norm") train.clip_norm = v.get<double>();
        else if (k == "patience") train.patience = v.get<std::size_t>();
        else if (k == "hidden_dim") train.hidden_dim = v.get<std::size_t>();
        else if (k == "weighting") weighting = v.get<std::string>();
        else if (k == "nb_alpha") baseline.nb_alpha = v.get<double>();
        else if (k == "logreg_l2") baseline.logreg_l2 = v.get<double>();
        else if (k == "logreg_lr") baseline.logreg_lr = v.get<double>();
        else if (k == "logreg_iters") baseline.logreg_iters = v.get<std::size_t>();
        else if (k == "svm_c") baseline.svm_c = v.get<double>();
        else if (k == "svm_eta0") baseline.svm_eta0 = v.get<double>();
        else if (k == "svm_iters") baseline.svm_iters = v.get<std::size_t>();
        else if (k == "tree_max_depth") baseline.tree_max_depth = v.get<std::size_t>();
        else if (k == "tree_min_leaf") baseline.tree_min_leaf = v.get<std::size_t>();
        else if (k == "folds") folds = v.get<std::size_t>();
        else if (k == "min_bin") min_bin = v.get<std::size_t>();
        else if (k == "jobs") jobs = v.get<std::size_t>();
        else throw ConfigError("unknown config key '" + k + "'");
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + k + "' has the wrong type");
      }
    }
  }

  // Reads a config file: either a bare config object or an artifact that
  // embeds one under "run_config".
  static nlohmann::json read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
    if (j.is_object() && j.contains("run_config")) return j["run_config"];
    return j;
  }

  eval::BenchmarkConfig benchmark_config() const {
    eval::BenchmarkConfig b;
    b.folds = folds;
    b.seed = seed;
    b.maxlen = maxlen;
    b.min_freq = min_freq;
    b.embed_dim = embed_dim;
    b.init_range = init_range;
    b.freeze_embeddings = freeze_embeddings;
    b.train = train;
    b.baseline = baseline;
    b.champion = champion;
    b.jobs = jobs;
    return b;
  }
};

}  // namespace orgbin
