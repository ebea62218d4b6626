// Copyright 2026 The ginlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/synth.hpp"

namespace ginlab {

/// fold_of[i] is the validation fold of example i.
struct FoldAssignment {
  std::size_t num_folds = 0;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> validation(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> training(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
  }
};

/// Stratified k-fold split. Each class is shuffled with the seed and dealt
/// round-robin over the folds; the deal continues across classes, so both
/// per-class and total fold sizes differ by at most one.
inline FoldAssignment stratified_kfold(std::span<const std::size_t> labels, std::size_t folds,
                                       std::uint64_t seed) {
  if (folds < 2) throw PreconditionError("need at least 2 folds");
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cls, members] : by_class) {
    if (members.size() < folds) {
      throw PreconditionError("stratification impossible: class " + std::to_string(cls) + " has " +
                              std::to_string(members.size()) + " members for " +
                              std::to_string(folds) + " folds");
    }
  }
  std::mt19937_64 rng(seed);
  FoldAssignment out{folds, std::vector<std::size_t>(labels.size())};
  std::size_t next = 0;
  for (auto& [cls, members] : by_class) {
    portable_shuffle(members, rng);
    for (std::size_t i : members) {
      out.fold_of[i] = next;
      next = (next + 1) % folds;
    }
  }
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population standard deviation.
inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

}  // namespace ginlab
