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

// Message-passing graph networks.
//
// One layer computes, for every node v,
//   GinStyle    combine((1 + eps) h_v + AGG{h_u : u in N(v)})
//   GcnStyle    combine(AGG{h_u : u in N(v) + v})
//   SageConcat  combine([h_v, AGG{relu(W h_u + b) : u in N(v)}])
// where AGG is sum, mean or element-wise max and combine is a 2-layer MLP or
// a single linear layer, each followed by batchnorm and ReLU. The graph
// vector concatenates a sum or mean over nodes of every layer, input
// included; class logits are the sum of one linear head per layer.
//
// Graphs are processed as one block-diagonal batch: node rows of all graphs
// are stacked and neighbor lists index into the stacked rows.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ginlab/encoding.hpp"
#include "ginlab/error.hpp"
#include "ginlab/graph.hpp"
#include "ginlab/tensor.hpp"
#include "json.hpp"

namespace ginlab {

enum class Aggregator { Sum, Mean, Max };
enum class Combine { Mlp2, OneLayer };
enum class EpsilonMode { Fixed0, Learnable };
enum class SelfInclusion { GinStyle, GcnStyle, SageConcat };
enum class Readout { SumConcat, MeanConcat };

NLOHMANN_JSON_SERIALIZE_ENUM(Aggregator, {{Aggregator::Sum, "sum"}, {Aggregator::Mean, "mean"}, {Aggregator::Max, "max"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Combine, {{Combine::Mlp2, "mlp2"}, {Combine::OneLayer, "one_layer"}})
NLOHMANN_JSON_SERIALIZE_ENUM(EpsilonMode, {{EpsilonMode::Fixed0, "fixed0"}, {EpsilonMode::Learnable, "learnable"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SelfInclusion, {{SelfInclusion::GinStyle, "gin"},
                                             {SelfInclusion::GcnStyle, "gcn"},
                                             {SelfInclusion::SageConcat, "sage_concat"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Readout, {{Readout::SumConcat, "sum_concat"}, {Readout::MeanConcat, "mean_concat"}})

struct GnnConfig {
  std::string name = "custom";
  std::size_t num_layers = 5;  // includes the input layer
  std::size_t hidden_dim = 32;
  Aggregator aggregator = Aggregator::Sum;
  Combine combine = Combine::Mlp2;
  EpsilonMode epsilon_mode = EpsilonMode::Fixed0;
  SelfInclusion self_inclusion = SelfInclusion::GinStyle;
  Readout readout = Readout::SumConcat;
  double dropout = 0.0;
  bool use_batchnorm = true;

  void validate() const {
    if (num_layers < 1) throw PreconditionError("num_layers must be at least 1");
    if (hidden_dim < 1) throw PreconditionError("hidden_dim must be at least 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw PreconditionError("dropout must lie in [0, 1)");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["num_layers"] = num_layers;
    j["hidden_dim"] = hidden_dim;
    j["aggregator"] = aggregator;
    j["combine"] = combine;
    j["epsilon_mode"] = epsilon_mode;
    j["self_inclusion"] = self_inclusion;
    j["readout"] = readout;
    j["dropout"] = dropout;
    j["use_batchnorm"] = use_batchnorm;
    return j;
  }

  /// Missing fields keep their defaults; unknown enum strings are errors.
  static GnnConfig from_json(const nlohmann::json& j) {
    GnnConfig c;
    const auto get_enum = [&](const char* key, auto& field) {
      if (!j.contains(key)) return;
      using E = std::decay_t<decltype(field)>;
      const E parsed = j.at(key).get<E>();
      // The enum serializer maps unknown strings to the first entry.
      if (nlohmann::json(parsed) != j.at(key)) {
        throw FormatError(std::string("unknown value for \"") + key + "\": " + j.at(key).dump());
      }
      field = parsed;
    };
    try {
      if (j.contains("name")) c.name = j.at("name").get<std::string>();
      if (j.contains("num_layers")) c.num_layers = j.at("num_layers").get<std::size_t>();
      if (j.contains("hidden_dim")) c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
      get_enum("aggregator", c.aggregator);
      get_enum("combine", c.combine);
      get_enum("epsilon_mode", c.epsilon_mode);
      get_enum("self_inclusion", c.self_inclusion);
      get_enum("readout", c.readout);
      if (j.contains("dropout")) c.dropout = j.at("dropout").get<double>();
      if (j.contains("use_batchnorm")) c.use_batchnorm = j.at("use_batchnorm").get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad model config: ") + e.what());
    }
    c.validate();
    return c;
  }

  bool operator==(const GnnConfig&) const = default;
};

/// Canonical preset names, in table order.
inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"gin-0",    "gin-eps", "sum-1layer", "mean-mlp",
                                              "gcn",      "max-mlp", "graphsage"};
  return names;
}

namespace detail {

// Lower-case alphanumerics only, with the Greek epsilon spelled out.
inline std::string preset_key(std::string name) {
  for (const std::string eps : {"\xCE\xB5", "\xCF\xB5"}) {
    for (std::size_t at; (at = name.find(eps)) != std::string::npos;) name.replace(at, eps.size(), "eps");
  }
  std::string key;
  for (unsigned char ch : name) {
    if (std::isalnum(ch)) key.push_back(static_cast<char>(std::tolower(ch)));
  }
  return key;
}

}  // namespace detail

/// Looks up a preset by canonical name or table row name ("GIN-0",
/// "Mean-1-Layer (GCN)", "Max-1-Layer", ...).
inline std::optional<GnnConfig> find_preset(const std::string& name) {
  static const std::map<std::string, std::string> aliases{
      {"gin0", "gin-0"},           {"gineps", "gin-eps"},         {"sum1layer", "sum-1layer"},
      {"meanmlp", "mean-mlp"},     {"gcn", "gcn"},                {"mean1layer", "gcn"},
      {"mean1layergcn", "gcn"},    {"maxmlp", "max-mlp"},         {"graphsage", "graphsage"},
      {"max1layer", "graphsage"},  {"max1layergraphsage", "graphsage"}};
  auto it = aliases.find(detail::preset_key(name));
  if (it == aliases.end()) return std::nullopt;
  GnnConfig c;
  c.name = it->second;
  const std::string& n = it->second;
  if (n == "gin-eps") c.epsilon_mode = EpsilonMode::Learnable;
  if (n == "sum-1layer") c.combine = Combine::OneLayer;
  if (n == "mean-mlp") c.aggregator = Aggregator::Mean;
  if (n == "gcn") {
    c.aggregator = Aggregator::Mean;
    c.combine = Combine::OneLayer;
    c.self_inclusion = SelfInclusion::GcnStyle;
  }
  if (n == "max-mlp") c.aggregator = Aggregator::Max;
  if (n == "graphsage") {
    c.aggregator = Aggregator::Max;
    c.combine = Combine::OneLayer;
    c.self_inclusion = SelfInclusion::SageConcat;
  }
  return c;
}

inline GnnConfig preset(const std::string& name) {
  if (auto c = find_preset(name)) return *c;
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw PreconditionError("unknown preset '" + name + "'; valid presets: " + valid);
}

/// A preset name or a JSON config object.
inline GnnConfig resolve_config(const std::string& spec) {
  if (!spec.empty() && spec.front() == '{') {
    try {
      return GnnConfig::from_json(nlohmann::json::parse(spec));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("bad model config JSON: ") + e.what());
    }
  }
  return preset(spec);
}

/// Width of the input layer for a graph's features.
inline std::size_t feature_dimension(const Graph& g) {
  if (const auto* c = std::get_if<CategoricalFeatures>(&g.features())) return c->vocabulary_size;
  return std::get<DenseFeatures>(g.features()).dimension;
}

inline std::size_t feature_dimension(const Dataset& d) {
  std::size_t dim = 0;
  for (const auto& g : d.graphs()) dim = std::max(dim, feature_dimension(g));
  return dim;
}

/// Several graphs stacked into one block-diagonal graph.
struct GraphBatch {
  std::size_t num_graphs = 0;
  std::size_t num_nodes = 0;
  Tensor features;            // num_nodes x input dim
  Segments neighbors;         // N(v)
  Segments closed_neighbors;  // N(v) + v
  Segments graphs;            // nodes of each graph
  std::vector<std::size_t> labels;  // filled when every graph has a label
};

inline GraphBatch make_batch(std::span<const Graph* const> graphs, std::size_t input_dim) {
  GraphBatch b;
  b.num_graphs = graphs.size();
  for (const Graph* g : graphs) b.num_nodes += g->num_nodes();
  b.features = Tensor(b.num_nodes, input_dim);
  bool all_labelled = true;
  std::size_t base = 0;
  for (const Graph* g : graphs) {
    const std::size_t n = g->num_nodes();
    if (const auto* c = std::get_if<CategoricalFeatures>(&g->features())) {
      for (NodeId v = 0; v < n; ++v) {
        if (c->labels[v] >= input_dim) {
          throw DimensionError("node label " + std::to_string(c->labels[v]) + " does not fit input dimension " +
                               std::to_string(input_dim));
        }
        b.features(base + v, c->labels[v]) = 1.0;
      }
    } else {
      const auto& d = std::get<DenseFeatures>(g->features());
      if (d.dimension != input_dim) {
        throw DimensionError("dense features of dimension " + std::to_string(d.dimension) +
                             " for input dimension " + std::to_string(input_dim));
      }
      std::copy(d.values.begin(), d.values.end(), b.features.data() + base * input_dim);
    }
    for (NodeId v = 0; v < n; ++v) {
      bool self_added = false;
      for (NodeId u : g->neighbors(v)) {
        if (!self_added && u > v) {
          b.closed_neighbors.index.push_back(base + v);
          self_added = true;
        }
        b.neighbors.index.push_back(base + u);
        if (u == v) self_added = true;  // a stored self-loop already covers v
        b.closed_neighbors.index.push_back(base + u);
      }
      if (!self_added) b.closed_neighbors.index.push_back(base + v);
      b.neighbors.offsets.push_back(b.neighbors.index.size());
      b.closed_neighbors.offsets.push_back(b.closed_neighbors.index.size());
      b.graphs.index.push_back(base + v);
    }
    b.graphs.offsets.push_back(b.graphs.index.size());
    if (g->label()) {
      b.labels.push_back(*g->label());
    } else {
      all_labelled = false;
    }
    base += n;
  }
  if (!all_labelled) b.labels.clear();
  return b;
}

inline GraphBatch make_batch(const Graph& g, std::size_t input_dim) {
  const Graph* p = &g;
  return make_batch(std::span<const Graph* const>(&p, 1), input_dim);
}

inline GraphBatch make_batch(const Dataset& d, std::span<const std::size_t> indices, std::size_t input_dim) {
  std::vector<const Graph*> graphs;
  graphs.reserve(indices.size());
  for (std::size_t i : indices) graphs.push_back(&d[i]);
  return make_batch(graphs, input_dim);
}

class GnnModel {
 public:
  struct Layer {
    Parameter epsilon;  // learnable eps, 1x1
    Linear pool;        // SageConcat neighbor transform
    Linear lin1;
    BatchNorm bn1;      // inside the 2-layer MLP
    Linear lin2;
    BatchNorm bn_out;
  };

  struct Forward {
    std::vector<Var> layers;  // h^(0) .. h^(K-1), stacked node rows
    Var graph_vector;         // num_graphs x sum of layer widths
    Var logits;               // num_graphs x num_classes
  };

  GnnModel(GnnConfig config, std::size_t input_dim, std::size_t num_classes, std::uint64_t seed)
      : config_(std::move(config)), input_dim_(input_dim), num_classes_(num_classes) {
    config_.validate();
    if (input_dim < 1) throw PreconditionError("input dimension must be at least 1");
    if (num_classes < 1) throw PreconditionError("need at least one class");
    std::mt19937_64 rng(seed);
    const std::size_t H = config_.hidden_dim;
    for (std::size_t k = 1; k < config_.num_layers; ++k) {
      const std::string p = "layer" + std::to_string(k);
      const std::size_t in = layer_dim(k - 1);
      Layer l;
      l.epsilon = Parameter(p + ".eps", Tensor(1, 1, 0.0));
      std::size_t combine_in = in;
      if (config_.self_inclusion == SelfInclusion::SageConcat) {
        l.pool = Linear(in, H, rng, p + ".pool");
        combine_in = in + H;
      }
      l.lin1 = Linear(combine_in, H, rng, p + ".lin1");
      if (config_.combine == Combine::Mlp2) {
        l.bn1 = BatchNorm(H, p + ".bn1");
        l.lin2 = Linear(H, H, rng, p + ".lin2");
      }
      l.bn_out = BatchNorm(H, p + ".bn_out");
      layers_.push_back(std::move(l));
    }
    for (std::size_t k = 0; k < config_.num_layers; ++k) {
      heads_.emplace_back(layer_dim(k), num_classes, rng, "head" + std::to_string(k));
    }
  }

  const GnnConfig& config() const { return config_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t layer_dim(std::size_t k) const { return k == 0 ? input_dim_ : config_.hidden_dim; }
  std::size_t graph_vector_dim() const {
    std::size_t d = 0;
    for (std::size_t k = 0; k < config_.num_layers; ++k) d += layer_dim(k);
    return d;
  }
  Layer& layer(std::size_t k) { return layers_.at(k - 1); }
  Linear& head(std::size_t k) { return heads_.at(k); }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (auto& l : layers_) {
      if (config_.epsilon_mode == EpsilonMode::Learnable && config_.self_inclusion == SelfInclusion::GinStyle) {
        out.push_back(&l.epsilon);
      }
      if (config_.self_inclusion == SelfInclusion::SageConcat) l.pool.collect(out);
      l.lin1.collect(out);
      if (config_.combine == Combine::Mlp2) {
        if (config_.use_batchnorm) l.bn1.collect(out);
        l.lin2.collect(out);
      }
      if (config_.use_batchnorm) l.bn_out.collect(out);
    }
    for (auto& h : heads_) h.collect(out);
    return out;
  }

  /// Neighborhood aggregate feeding layer k (1-based).
  Var aggregate(Tape& tape, std::size_t k, Var h, const GraphBatch& batch) {
    const auto reduce = [&](Var x, const Segments& seg) {
      switch (config_.aggregator) {
        case Aggregator::Sum: return row_sum(x, seg);
        case Aggregator::Mean: return row_mean(x, seg);
        case Aggregator::Max: return row_max(x, seg);
      }
      throw PreconditionError("unknown aggregator");
    };
    switch (config_.self_inclusion) {
      case SelfInclusion::GinStyle: return reduce(h, batch.neighbors);
      case SelfInclusion::GcnStyle: return reduce(h, batch.closed_neighbors);
      case SelfInclusion::SageConcat: return reduce(relu(layer(k).pool(tape, h)), batch.neighbors);
    }
    throw PreconditionError("unknown self-inclusion mode");
  }

  /// Merges node states with their aggregate and applies the layer's MLP.
  Var combine(Tape& tape, std::size_t k, Var h, Var agg, bool training) {
    Layer& l = layer(k);
    Var merged = agg;
    if (config_.self_inclusion == SelfInclusion::GinStyle) {
      const Var self = config_.epsilon_mode == EpsilonMode::Learnable ? scale_by(h, tape.parameter(l.epsilon), 1.0) : h;
      merged = add(self, agg);
    } else if (config_.self_inclusion == SelfInclusion::SageConcat) {
      merged = concat_cols({h, agg});
    }
    Var x = l.lin1(tape, merged);
    if (config_.combine == Combine::Mlp2) {
      if (config_.use_batchnorm) x = l.bn1(tape, x, training);
      x = l.lin2(tape, relu(x));
    }
    if (config_.use_batchnorm) x = l.bn_out(tape, x, training);
    return relu(x);
  }

  Var layer_forward(Tape& tape, std::size_t k, Var h, const GraphBatch& batch, bool training) {
    return combine(tape, k, h, aggregate(tape, k, h, batch), training);
  }

  Var pool(Var h, const GraphBatch& batch) const {
    return config_.readout == Readout::SumConcat ? row_sum(h, batch.graphs) : row_mean(h, batch.graphs);
  }

  /// Full forward pass. Dropout on the head outputs needs `rng` in training.
  Forward forward(Tape& tape, const GraphBatch& batch, bool training, std::mt19937_64* rng = nullptr) {
    if (batch.features.cols() != input_dim_) {
      throw DimensionError("batch features " + batch.features.shape_string() + " for model input dimension " +
                           std::to_string(input_dim_));
    }
    if (training && config_.dropout > 0.0 && !rng) throw PreconditionError("training with dropout needs an rng");
    Forward f;
    f.layers.push_back(tape.constant(batch.features));
    for (std::size_t k = 1; k < config_.num_layers; ++k) {
      f.layers.push_back(layer_forward(tape, k, f.layers.back(), batch, training));
    }
    std::vector<Var> pooled;
    std::optional<Var> logits;
    for (std::size_t k = 0; k < config_.num_layers; ++k) {
      pooled.push_back(pool(f.layers[k], batch));
      Var z = heads_[k](tape, pooled.back());
      if (training && config_.dropout > 0.0) z = dropout(z, config_.dropout, true, *rng);
      logits = logits ? add(*logits, z) : z;
    }
    f.graph_vector = concat_cols(pooled);
    f.logits = *logits;
    return f;
  }

  /// Eval-mode graph vectors, one row per graph. Does not modify the model.
  Tensor graph_vectors(const GraphBatch& batch) {
    Tape tape;
    return forward(tape, batch, false).graph_vector.value();
  }

  Tensor logits(const GraphBatch& batch) {
    Tape tape;
    return forward(tape, batch, false).logits.value();
  }

  std::vector<std::size_t> predict(const GraphBatch& batch) {
    const Tensor z = logits(batch);
    std::vector<std::size_t> out(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
      const auto r = z.row(i);
      out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    }
    return out;
  }

 private:
  GnnConfig config_;
  std::size_t input_dim_;
  std::size_t num_classes_;
  std::vector<Layer> layers_;
  std::vector<Linear> heads_;
};

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("distance between vectors of different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Embeddings closer than this are treated as equal.
inline constexpr double kEmbeddingTolerance = 1e-7;

/// Exact GIN: every layer maps (h_v, {h_u : u in N(v)}) through the injective
/// encoding (1 + eps) f(h_v) + sum f(h_u), with node states held as dictionary
/// ids, and the readout of layer k is the exact sum encoding of the layer's
/// node ids. Signatures from one IdealGin are comparable with each other.
class IdealGin {
 public:
  struct Signature {
    std::vector<Rational> layers;  // readout of layers 0..K
    bool operator==(const Signature&) const = default;
  };

  /// Graphs may have at most `max_nodes` nodes; the encoding base is
  /// max_nodes + 1, which bounds every neighborhood and node multiset.
  explicit IdealGin(std::size_t max_nodes) : base_(max_nodes + 1) {}

  std::size_t base() const { return base_; }
  std::size_t num_ids(std::size_t k) const { return k < dict_.size() ? dict_[k].size() : 0; }

  Signature embed(const Graph& g, std::size_t K) {
    const auto& input = g.categorical();
    if (g.num_nodes() >= base_) {
      throw PreconditionError("graph with " + std::to_string(g.num_nodes()) + " nodes exceeds the ideal GIN bound of " +
                              std::to_string(base_ - 1));
    }
    std::vector<std::size_t> ids = input.labels;
    Signature sig;
    sig.layers.push_back(readout(ids));
    for (std::size_t k = 1; k <= K; ++k) {
      if (dict_.size() <= k) dict_.resize(k + 1);
      std::vector<std::size_t> next(g.num_nodes());
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        Rational neighborhood = 0;
        for (NodeId u : g.neighbors(v)) neighborhood += power(ids[u]);
        const Rational fc = power(ids[v]);
        EpsilonNumber h{fc + neighborhood, fc};
        next[v] = dict_[k].emplace(std::move(h), dict_[k].size()).first->second;
      }
      ids = std::move(next);
      sig.layers.push_back(readout(ids));
    }
    return sig;
  }

 private:
  const Rational& power(std::size_t z) {
    while (powers_.size() <= z) powers_.push_back(inverse_power(base_, powers_.size()));
    return powers_[z];
  }

  Rational readout(const std::vector<std::size_t>& ids) {
    Rational total = 0;
    for (std::size_t z : ids) total += power(z);
    return total;
  }

  std::size_t base_;
  std::vector<Rational> powers_;
  std::vector<std::map<EpsilonNumber, std::size_t>> dict_;
};

}  // namespace ginlab
