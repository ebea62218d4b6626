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

// Cross-validated training, epoch selection and the table / curve outputs.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ginlab/cv.hpp"
#include "ginlab/error.hpp"
#include "ginlab/gnn.hpp"
#include "ginlab/parallel.hpp"
#include "ginlab/synth.hpp"
#include "ginlab/tensor.hpp"
#include "ginlab/wl_classify.hpp"

namespace ginlab {

/// Sum readout for labeled inputs, mean readout when every node feature is
/// the same (the social-network setting).
enum class ReadoutPolicy { Auto, Preset, Sum, Mean };

NLOHMANN_JSON_SERIALIZE_ENUM(ReadoutPolicy, {{ReadoutPolicy::Auto, "auto"},
                                             {ReadoutPolicy::Preset, "preset"},
                                             {ReadoutPolicy::Sum, "sum"},
                                             {ReadoutPolicy::Mean, "mean"}})

inline bool has_uniform_features(const Dataset& d) { return feature_dimension(d) <= 1; }

struct TrainSpec {
  GnnConfig config = preset("gin-0");
  std::size_t epochs = 350;
  std::size_t batch_size = 32;
  std::size_t hidden = 32;
  double dropout = 0.0;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  ReadoutPolicy readout = ReadoutPolicy::Auto;
  /// Train only the first `fold_limit` folds (0 = all). Selection still
  /// averages over the folds that ran.
  std::size_t fold_limit = 0;
  /// Accept batch/hidden/dropout values outside the search grid.
  bool allow_off_grid = false;
  AdamOptions adam;
  std::size_t threads = 1;

  void validate() const {
    config.validate();
    if (epochs < 1) throw PreconditionError("epochs must be at least 1");
    if (batch_size < 1) throw PreconditionError("batch size must be at least 1");
    if (folds < 2) throw PreconditionError("need at least 2 folds");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw PreconditionError("dropout must lie in [0, 1)");
    if (allow_off_grid) return;
    if (batch_size != 32 && batch_size != 128) {
      throw PreconditionError("batch size " + std::to_string(batch_size) + " is off the grid {32, 128}");
    }
    if (hidden != 16 && hidden != 32 && hidden != 64) {
      throw PreconditionError("hidden size " + std::to_string(hidden) + " is off the grid {16, 32, 64}");
    }
    if (dropout != 0.0 && dropout != 0.5) {
      throw PreconditionError("dropout " + std::to_string(dropout) + " is off the grid {0, 0.5}");
    }
  }

  /// The preset with hidden size, dropout and readout applied for `dataset`.
  GnnConfig model_config(const Dataset& dataset) const {
    GnnConfig c = config;
    c.hidden_dim = hidden;
    c.dropout = dropout;
    switch (readout) {
      case ReadoutPolicy::Auto:
        c.readout = has_uniform_features(dataset) ? Readout::MeanConcat : Readout::SumConcat;
        break;
      case ReadoutPolicy::Sum: c.readout = Readout::SumConcat; break;
      case ReadoutPolicy::Mean: c.readout = Readout::MeanConcat; break;
      case ReadoutPolicy::Preset: break;
    }
    return c;
  }

  nlohmann::ordered_json to_json() const {
    return {{"config", config.to_json()},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"hidden", hidden},
            {"dropout", dropout},
            {"folds", folds},
            {"fold_limit", fold_limit},
            {"seed", seed},
            {"readout", readout},
            {"learning_rate", adam.learning_rate},
            {"decay", adam.decay},
            {"decay_every", adam.decay_every}};
  }
};

struct EpochStats {
  double loss = 0.0;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;  // 0 when there is no validation split
};

struct FoldRecord {
  std::size_t fold = 0;
  std::vector<EpochStats> epochs;
};

struct RunRecord {
  std::string dataset;
  std::string config;
  nlohmann::ordered_json spec;
  std::vector<FoldRecord> folds;
  std::size_t selected_epoch = 0;  // 1-based
  MeanStd validation;              // over folds at the selected epoch
  double train_accuracy = 0.0;     // mean over folds at the selected epoch

  /// Validation accuracy averaged over folds, per epoch.
  std::vector<double> mean_validation_curve() const {
    std::vector<double> curve(folds.empty() ? 0 : folds[0].epochs.size(), 0.0);
    for (const auto& f : folds) {
      for (std::size_t e = 0; e < curve.size(); ++e) curve[e] += f.epochs[e].validation_accuracy;
    }
    for (double& c : curve) c /= static_cast<double>(folds.size());
    return curve;
  }

  static void write_results_header(std::ostream& os) { os << "dataset,config,fold,epoch,split,metric,value\n"; }

  void write_results(std::ostream& os) const {
    for (const auto& f : folds) {
      for (std::size_t e = 0; e < f.epochs.size(); ++e) {
        const auto& s = f.epochs[e];
        const auto line = [&](const char* split, const char* metric, double v) {
          os << dataset << ',' << config << ',' << f.fold << ',' << e + 1 << ',' << split << ',' << metric << ','
             << format_double(v) << '\n';
        };
        line("train", "loss", s.loss);
        line("train", "accuracy", s.train_accuracy);
        line("validation", "accuracy", s.validation_accuracy);
      }
    }
  }

  static std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  }
};

namespace detail {

inline double accuracy(GnnModel& model, const GraphBatch& batch) {
  if (batch.num_graphs == 0) return 0.0;
  const auto pred = model.predict(batch);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == batch.labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

}  // namespace detail

/// Trains one model on `train` rows, evaluating (eval mode) on `train` and
/// `validation` after every epoch. Minibatches are consecutive chunks of a
/// per-epoch shuffle, so they always hold whole graphs.
inline std::vector<EpochStats> train_split(const TrainSpec& spec, const Dataset& dataset,
                                           const std::vector<std::size_t>& train,
                                           const std::vector<std::size_t>& validation, std::uint64_t seed) {
  if (train.empty()) throw PreconditionError("empty training split");
  const std::size_t input_dim = std::max<std::size_t>(feature_dimension(dataset), 1);
  GnnModel model(spec.model_config(dataset), input_dim, dataset.num_classes(), seed);
  Adam adam(model.parameters(), spec.adam);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const GraphBatch train_eval = make_batch(dataset, train, input_dim);
  const GraphBatch val_eval = make_batch(dataset, validation, input_dim);

  std::vector<std::size_t> order = train;
  std::vector<EpochStats> out;
  out.reserve(spec.epochs);
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    portable_shuffle(order, rng);
    double loss_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t end = std::min(order.size(), start + spec.batch_size);
      const std::span<const std::size_t> chunk(order.data() + start, end - start);
      const GraphBatch batch = make_batch(dataset, chunk, input_dim);
      adam.zero_grad();
      Tape tape;
      const auto f = model.forward(tape, batch, true, &rng);
      const Var loss = softmax_cross_entropy(f.logits, batch.labels);
      tape.backward(loss);
      adam.step(epoch);
      loss_total += loss.value()(0, 0) * static_cast<double>(chunk.size());
    }
    EpochStats s;
    s.loss = loss_total / static_cast<double>(order.size());
    s.train_accuracy = detail::accuracy(model, train_eval);
    s.validation_accuracy = detail::accuracy(model, val_eval);
    out.push_back(s);
  }
  return out;
}

/// Stratified k-fold training. Fold f uses seed + f; the selected epoch is
/// the one with the best validation accuracy averaged over folds (earliest
/// on ties), and mean/std are reported at that one epoch.
inline RunRecord train_model(const TrainSpec& spec, const Dataset& dataset) {
  spec.validate();
  const auto labels = dataset.labels();
  const auto split = stratified_kfold(labels, spec.folds, spec.seed);
  const std::size_t runs = spec.fold_limit ? std::min(spec.fold_limit, spec.folds) : spec.folds;
  RunRecord r;
  r.dataset = dataset.name();
  r.config = spec.config.name;
  r.spec = spec.to_json();
  r.folds.resize(runs);
  parallel_for(runs, spec.threads, [&](std::size_t f) {
    r.folds[f].fold = f;
    r.folds[f].epochs = train_split(spec, dataset, split.training(f), split.validation(f), spec.seed + f);
  });
  const auto curve = r.mean_validation_curve();
  r.selected_epoch = static_cast<std::size_t>(std::max_element(curve.begin(), curve.end()) - curve.begin()) + 1;
  std::vector<double> val;
  for (const auto& f : r.folds) {
    val.push_back(f.epochs[r.selected_epoch - 1].validation_accuracy);
    r.train_accuracy += f.epochs[r.selected_epoch - 1].train_accuracy;
  }
  r.train_accuracy /= static_cast<double>(runs);
  r.validation = mean_std(val);
  return r;
}

// ------------------------------------------------------------------ table

struct TableRow {
  std::string config;
  MeanStd accuracy;
  std::size_t selected_epoch = 0;  // WL: the selected iteration count
  double train_accuracy = 0.0;
};

struct Table {
  std::string dataset;
  std::vector<TableRow> rows;  // GNN rows in spec order, then WL
  std::vector<RunRecord> runs;

  void write_summary(std::ostream& os) const {
    os << "dataset,config,mean,std,selected_epoch,train_acc\n";
    for (const auto& r : rows) {
      os << dataset << ',' << r.config << ',' << RunRecord::format_double(r.accuracy.mean) << ','
         << RunRecord::format_double(r.accuracy.std) << ',' << r.selected_epoch << ','
         << RunRecord::format_double(r.train_accuracy) << '\n';
    }
  }

  void write_results(std::ostream& os) const {
    RunRecord::write_results_header(os);
    for (const auto& run : runs) run.write_results(os);
  }
};

struct WlBaselineOptions {
  std::vector<std::size_t> iterations{1, 2, 3, 4, 5, 6};
  std::vector<double> lambdas = wl::kDefaultLambdas;
};

/// Best WL row over the iteration sweep; selected_epoch holds the K chosen.
inline TableRow wl_baseline_row(const Dataset& dataset, std::size_t folds, std::uint64_t seed,
                                const WlBaselineOptions& options = {}) {
  TableRow best{"wl", {}, 0, 0.0};
  bool first = true;
  for (std::size_t K : options.iterations) {
    const auto r = wl::wl_classify(dataset, K, folds, seed, options.lambdas);
    if (first || r.best.validation.mean > best.accuracy.mean) {
      best = {"wl", r.best.validation, K, r.best.train_accuracy};
      first = false;
    }
  }
  return best;
}

/// One cross-validated run per spec plus the WL row.
inline Table run_table(const Dataset& dataset, const std::vector<TrainSpec>& specs,
                       const WlBaselineOptions& wl_options = {}) {
  Table t;
  t.dataset = dataset.name();
  for (const auto& spec : specs) {
    RunRecord r = train_model(spec, dataset);
    t.rows.push_back({r.config, r.validation, r.selected_epoch, r.train_accuracy});
    t.runs.push_back(std::move(r));
  }
  const std::size_t folds = specs.empty() ? 10 : specs.front().folds;
  const std::uint64_t seed = specs.empty() ? 0 : specs.front().seed;
  t.rows.push_back(wl_baseline_row(dataset, folds, seed, wl_options));
  return t;
}

// ----------------------------------------------------------------- curves

struct CurveSet {
  std::string dataset;
  std::vector<std::size_t> train_rows;  // fold 0's training split
  std::vector<std::pair<std::string, std::vector<EpochStats>>> gnn;
  std::vector<std::pair<std::size_t, double>> wl;  // (iterations, training accuracy)

  double final_train_accuracy(const std::string& config) const {
    for (const auto& [name, curve] : gnn) {
      if (name == config) return curve.back().train_accuracy;
    }
    throw PreconditionError("no curve for '" + config + "'");
  }
  double best_wl_train_accuracy() const {
    double best = 0.0;
    for (const auto& [k, acc] : wl) best = std::max(best, acc);
    return best;
  }

  /// Same columns as the results CSV; WL rows carry epoch = iterations.
  void write_csv(std::ostream& os) const {
    RunRecord::write_results_header(os);
    for (const auto& [name, curve] : gnn) {
      for (std::size_t e = 0; e < curve.size(); ++e) {
        os << dataset << ',' << name << ",0," << e + 1 << ",train,loss," << RunRecord::format_double(curve[e].loss)
           << '\n';
        os << dataset << ',' << name << ",0," << e + 1 << ",train,accuracy,"
           << RunRecord::format_double(curve[e].train_accuracy) << '\n';
      }
    }
    for (const auto& [k, acc] : wl) {
      os << dataset << ",wl,0," << k << ",train,accuracy," << RunRecord::format_double(acc) << '\n';
    }
  }
};

/// Training curves on fold 0's training split for each spec, and WL
/// training accuracy on the same rows for each iteration count.
inline CurveSet run_curves(const Dataset& dataset, const std::vector<TrainSpec>& specs,
                           const std::vector<std::size_t>& wl_iterations = {1, 2, 3, 4, 5, 6},
                           double wl_lambda = 1e-3, std::size_t threads = 1) {
  CurveSet c;
  c.dataset = dataset.name();
  const std::size_t folds = specs.empty() ? 10 : specs.front().folds;
  const std::uint64_t seed = specs.empty() ? 0 : specs.front().seed;
  c.train_rows = stratified_kfold(dataset.labels(), folds, seed).training(0);
  c.gnn.resize(specs.size());
  for (const auto& s : specs) s.validate();
  parallel_for(specs.size(), threads, [&](std::size_t i) {
    c.gnn[i] = {specs[i].config.name, train_split(specs[i], dataset, c.train_rows, {}, specs[i].seed)};
  });
  for (std::size_t K : wl_iterations) c.wl.emplace_back(K, wl::wl_training_accuracy(dataset, K, c.train_rows, wl_lambda));
  return c;
}

}  // namespace ginlab
