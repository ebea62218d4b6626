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

// Graph classification with the WL subtree feature map and a linear
// classifier, evaluated by stratified cross-validation.

#pragma once

#include <map>
#include <span>
#include <vector>

#include "ginlab/cv.hpp"
#include "ginlab/graph.hpp"
#include "ginlab/linear_model.hpp"
#include "ginlab/wl.hpp"

namespace ginlab::wl {

inline const std::vector<double> kDefaultLambdas{1e-3, 1e-2, 1e-1, 1.0};

/// Explicit dense feature matrix for all graphs of `dataset` under one shared
/// dictionary; column order is the sorted (iteration, label) key order.
inline DesignMatrix wl_design_matrix(const Dataset& dataset, std::size_t K) {
  const auto features = wl_subtree_features(dataset, K);
  std::map<FeatureVector::Key, std::size_t> column;
  for (const auto& f : features) {
    for (const auto& [key, count] : f.counts()) column.emplace(key, 0);
  }
  std::size_t next = 0;
  for (auto& [key, col] : column) col = next++;
  DesignMatrix x{dataset.size(), column.size(), std::vector<double>(dataset.size() * column.size(), 0.0)};
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (const auto& [key, count] : features[i].counts()) {
      x.values[i * x.cols + column.at(key)] = static_cast<double>(count);
    }
  }
  return x;
}

struct LambdaResult {
  double lambda = 0.0;
  MeanStd validation;
  double train_accuracy = 0.0;  // mean over folds
  std::vector<double> fold_accuracies;
};

struct ClassifyResult {
  std::size_t iterations = 0;
  LambdaResult best;  // highest mean validation accuracy, first on ties
  std::vector<LambdaResult> per_lambda;
};

/// Fits on `train` rows and returns {train accuracy, accuracy on `test` rows}.
inline std::pair<double, double> fit_and_score(const DesignMatrix& x, std::span<const std::size_t> y,
                                               std::size_t num_classes,
                                               std::span<const std::size_t> train,
                                               std::span<const std::size_t> test, double lambda) {
  const auto scale = max_abs_scales(x, train);
  const auto xtr = select_rows(x, train, scale);
  std::vector<std::size_t> ytr, yte;
  for (std::size_t i : train) ytr.push_back(y[i]);
  for (std::size_t i : test) yte.push_back(y[i]);
  const auto model = LogisticRegression::fit(xtr, ytr, num_classes, lambda);
  const double test_acc = test.empty() ? 0.0 : model.accuracy(select_rows(x, test, scale), yte);
  return {model.accuracy(xtr, ytr), test_acc};
}

/// Stratified k-fold accuracy of the WL feature classifier, sweeping the
/// regularization strength and reporting the best mean validation accuracy.
inline ClassifyResult wl_classify(const Dataset& dataset, std::size_t K, std::size_t folds,
                                  std::uint64_t seed,
                                  const std::vector<double>& lambdas = kDefaultLambdas) {
  const auto labels = dataset.labels();
  const auto split = stratified_kfold(labels, folds, seed);
  const auto x = wl_design_matrix(dataset, K);
  ClassifyResult out;
  out.iterations = K;
  for (double lambda : lambdas) {
    LambdaResult r;
    r.lambda = lambda;
    double train_total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const auto [train_acc, val_acc] =
          fit_and_score(x, labels, dataset.num_classes(), split.training(f), split.validation(f), lambda);
      train_total += train_acc;
      r.fold_accuracies.push_back(val_acc);
    }
    r.train_accuracy = train_total / static_cast<double>(folds);
    r.validation = mean_std(r.fold_accuracies);
    if (out.per_lambda.empty() || r.validation.mean > out.best.validation.mean) out.best = r;
    out.per_lambda.push_back(std::move(r));
  }
  return out;
}

/// Training-set accuracy of the WL classifier fitted on `train` rows only.
inline double wl_training_accuracy(const Dataset& dataset, std::size_t K,
                                   std::span<const std::size_t> train, double lambda = 1e-3) {
  const auto labels = dataset.labels();
  const auto x = wl_design_matrix(dataset, K);
  return fit_and_score(x, labels, dataset.num_classes(), train, {}, lambda).first;
}

}  // namespace ginlab::wl
