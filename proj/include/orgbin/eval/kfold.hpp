#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "orgbin/common.hpp"
#include "orgbin/gold.hpp"

namespace orgbin::eval {

inline constexpr std::size_t kDefaultFolds = 10;

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;  // record indices, ascending within a fold
  std::vector<std::size_t> fold_of;             // fold index per record
  std::uint64_t seed = 0;

  std::size_t k() const { return folds.size(); }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != fold) out.push_back(i);
    return out;
  }

  std::string hash() const {
    Fnv1a h;
    h.update_u64(folds.size());
    for (auto f : fold_of) h.update_u64(f);
    return to_hex(h.digest());
  }
};

// Each class is shuffled with the seed and dealt round-robin into the folds.
// The dealing position carries over from one class to the next, so fold sizes
// differ by at most one overall as well as per class.
inline FoldPlan stratified_kfold(const gold::GoldDataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    if (ds.counts[c] < k) {
      throw DataError("stratified_kfold: class '" + ds.classes[c] + "' has " +
                      std::to_string(ds.counts[c]) + " examples, fewer than k=" + std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  plan.fold_of.assign(ds.size(), 0);
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
  Rng rng(derive_seed(seed, "folds"));
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (auto i : members) {
      plan.fold_of[i] = next;
      next = (next + 1) % k;
    }
  }
  for (std::size_t i = 0; i < ds.size(); ++i) plan.folds[plan.fold_of[i]].push_back(i);
  return plan;
}

}  // namespace orgbin::eval
