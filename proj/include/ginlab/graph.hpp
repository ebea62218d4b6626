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

// Graph data model: undirected node-annotated graphs stored as CSR
// adjacency, plus the dataset container used by every pipeline.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ginlab/error.hpp"

namespace ginlab {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// One label id per node drawn from {0, ..., vocabulary_size - 1}.
struct CategoricalFeatures {
  std::vector<std::size_t> labels;
  std::size_t vocabulary_size = 1;

  bool operator==(const CategoricalFeatures&) const = default;
};

/// Row-major `num_nodes x dimension` real features.
struct DenseFeatures {
  std::vector<double> values;
  std::size_t dimension = 0;

  bool operator==(const DenseFeatures&) const = default;
};

using NodeFeatures = std::variant<CategoricalFeatures, DenseFeatures>;

inline CategoricalFeatures uniform_labels(std::size_t num_nodes) {
  return CategoricalFeatures{std::vector<std::size_t>(num_nodes, 0), 1};
}

struct GraphOptions {
  bool allow_self_loops = false;
};

/// Immutable undirected graph. Adjacency is kept as sorted CSR rows; every
/// constructor validates symmetry, index bounds, duplicate edges, self-loops
/// and feature coverage, so a live Graph always satisfies its invariants.
class Graph {
 public:
  using Options = GraphOptions;

  Graph() : offsets_{0}, features_(uniform_labels(0)) {}

  /// Builds from per-node neighbor lists. Lists are sorted here but must
  /// already be symmetric and duplicate-free.
  Graph(std::vector<std::vector<NodeId>> adjacency, NodeFeatures features,
        std::optional<std::size_t> label = std::nullopt, Options options = {})
      : features_(std::move(features)), label_(label), options_(options) {
    const std::size_t n = adjacency.size();
    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
      auto& row = adjacency[v];
      std::sort(row.begin(), row.end());
      offsets_[v + 1] = offsets_[v] + row.size();
    }
    neighbors_.reserve(offsets_[n]);
    for (auto& row : adjacency) neighbors_.insert(neighbors_.end(), row.begin(), row.end());
    validate();
  }

  /// Builds from an undirected edge list. Each pair is inserted in both
  /// directions and repeated pairs collapse to one edge.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                          NodeFeatures features,
                          std::optional<std::size_t> label = std::nullopt,
                          Options options = {}) {
    std::vector<std::vector<NodeId>> adjacency(num_nodes);
    for (const auto& [u, v] : edges) {
      if (u >= num_nodes || v >= num_nodes) {
        throw GraphInvariantError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                  ") references a node outside [0, " +
                                  std::to_string(num_nodes) + ")");
      }
      if (u == v && !options.allow_self_loops) {
        throw GraphInvariantError("self-loop at node " + std::to_string(u) +
                                  " (self-loops are not permitted)");
      }
      adjacency[u].push_back(v);
      if (u != v) adjacency[v].push_back(u);
    }
    for (auto& row : adjacency) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return Graph(std::move(adjacency), std::move(features), label, options);
  }

  static Graph from_edges(std::size_t num_nodes, std::initializer_list<Edge> edges,
                          NodeFeatures features,
                          std::optional<std::size_t> label = std::nullopt,
                          Options options = {}) {
    return from_edges(num_nodes, std::span<const Edge>(edges.begin(), edges.size()),
                      std::move(features), label, options);
  }

  /// Uniform categorical features (every node label 0).
  static Graph unlabeled(std::size_t num_nodes, std::span<const Edge> edges) {
    return from_edges(num_nodes, edges, uniform_labels(num_nodes));
  }
  static Graph unlabeled(std::size_t num_nodes, std::initializer_list<Edge> edges) {
    return unlabeled(num_nodes, std::span<const Edge>(edges.begin(), edges.size()));
  }

  std::size_t num_nodes() const { return offsets_.size() - 1; }

  /// Number of undirected edges; a self-loop counts once.
  std::size_t num_edges() const {
    std::size_t loops = 0;
    for (NodeId v = 0; v < num_nodes(); ++v) {
      auto row = neighbors(v);
      loops += std::binary_search(row.begin(), row.end(), v) ? 1 : 0;
    }
    return (neighbors_.size() - loops) / 2 + loops;
  }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const {
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
  }

  /// CSR view: neighbors of v are flat_neighbors()[offsets()[v] .. offsets()[v+1]).
  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const NodeId> flat_neighbors() const { return neighbors_; }

  /// Edge list with u <= v, in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (NodeId u = 0; u < num_nodes(); ++u) {
      for (NodeId v : neighbors(u)) {
        if (u <= v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  const NodeFeatures& features() const { return features_; }
  bool is_categorical() const { return std::holds_alternative<CategoricalFeatures>(features_); }

  const CategoricalFeatures& categorical() const {
    if (const auto* c = std::get_if<CategoricalFeatures>(&features_)) return *c;
    throw PreconditionError(
        "graph has dense node features; discretize them into categorical labels first");
  }

  std::optional<std::size_t> label() const { return label_; }
  bool allows_self_loops() const { return options_.allow_self_loops; }

  Graph with_features(NodeFeatures features) const {
    Graph g = *this;
    g.features_ = std::move(features);
    g.validate_features();
    return g;
  }

  Graph with_label(std::optional<std::size_t> label) const {
    Graph g = *this;
    g.label_ = label;
    return g;
  }

  /// Relabels node v as perm[v]; perm must be a permutation of 0..n-1.
  Graph permuted(std::span<const NodeId> perm) const {
    const std::size_t n = num_nodes();
    if (perm.size() != n) throw PreconditionError("permutation size does not match graph");
    std::vector<bool> seen(n, false);
    for (NodeId p : perm) {
      if (p >= n || seen[p]) throw PreconditionError("not a permutation");
      seen[p] = true;
    }
    std::vector<std::vector<NodeId>> adjacency(n);
    for (NodeId v = 0; v < n; ++v) {
      for (NodeId u : neighbors(v)) adjacency[perm[v]].push_back(perm[u]);
    }
    NodeFeatures features = std::visit(
        [&](const auto& f) -> NodeFeatures {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, CategoricalFeatures>) {
            CategoricalFeatures out{std::vector<std::size_t>(n), f.vocabulary_size};
            for (NodeId v = 0; v < n; ++v) out.labels[perm[v]] = f.labels[v];
            return out;
          } else {
            DenseFeatures out{std::vector<double>(f.values.size()), f.dimension};
            for (NodeId v = 0; v < n; ++v) {
              std::copy_n(f.values.begin() + v * f.dimension, f.dimension,
                          out.values.begin() + perm[v] * f.dimension);
            }
            return out;
          }
        },
        features_);
    return Graph(std::move(adjacency), std::move(features), label_, options_);
  }

  /// Structural and feature equality under the identity node map.
  bool operator==(const Graph& other) const {
    return offsets_ == other.offsets_ && neighbors_ == other.neighbors_ &&
           features_ == other.features_ && label_ == other.label_;
  }

 private:
  void validate() const {
    const std::size_t n = num_nodes();
    for (NodeId v = 0; v < n; ++v) {
      auto row = neighbors(v);
      for (std::size_t i = 0; i < row.size(); ++i) {
        const NodeId u = row[i];
        if (u >= n) {
          throw GraphInvariantError("neighbor index " + std::to_string(u) + " of node " +
                                    std::to_string(v) + " is out of range");
        }
        if (i > 0 && row[i - 1] == u) {
          throw GraphInvariantError("duplicate edge (" + std::to_string(v) + ", " +
                                    std::to_string(u) + ")");
        }
        if (u == v && !options_.allow_self_loops) {
          throw GraphInvariantError("self-loop at node " + std::to_string(v) +
                                    " (self-loops are not permitted)");
        }
        if (!has_edge(u, v)) {
          throw GraphInvariantError("adjacency is not symmetric: " + std::to_string(v) +
                                    " -> " + std::to_string(u) + " has no reverse");
        }
      }
    }
    validate_features();
  }

  void validate_features() const {
    const std::size_t n = num_nodes();
    if (const auto* c = std::get_if<CategoricalFeatures>(&features_)) {
      if (c->labels.size() != n) {
        throw GraphInvariantError("categorical features cover " +
                                  std::to_string(c->labels.size()) + " nodes, graph has " +
                                  std::to_string(n));
      }
      for (std::size_t l : c->labels) {
        if (l >= c->vocabulary_size) {
          throw GraphInvariantError("node label " + std::to_string(l) +
                                    " exceeds vocabulary size " +
                                    std::to_string(c->vocabulary_size));
        }
      }
    } else {
      const auto& d = std::get<DenseFeatures>(features_);
      if (d.values.size() != n * d.dimension) {
        throw GraphInvariantError("dense features do not cover every node with dimension " +
                                  std::to_string(d.dimension));
      }
    }
  }

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  NodeFeatures features_;
  std::optional<std::size_t> label_;
  Options options_;
};

/// A labelled collection of graphs.
class Dataset {
 public:
  Dataset(std::vector<Graph> graphs, std::size_t num_classes, std::string name)
      : graphs_(std::move(graphs)), num_classes_(num_classes), name_(std::move(name)) {
    if (graphs_.empty()) throw PreconditionError("dataset '" + name_ + "' has no graphs");
    for (std::size_t i = 0; i < graphs_.size(); ++i) {
      const auto label = graphs_[i].label();
      if (!label) throw PreconditionError("graph " + std::to_string(i) + " has no class label");
      if (*label >= num_classes_) {
        throw PreconditionError("graph " + std::to_string(i) + " label " +
                                std::to_string(*label) + " >= num_classes " +
                                std::to_string(num_classes_));
      }
    }
  }

  const std::vector<Graph>& graphs() const { return graphs_; }
  const Graph& operator[](std::size_t i) const { return graphs_[i]; }
  std::size_t size() const { return graphs_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  const std::string& name() const { return name_; }

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out;
    out.reserve(graphs_.size());
    for (const auto& g : graphs_) out.push_back(*g.label());
    return out;
  }

  double average_nodes() const {
    double total = 0.0;
    for (const auto& g : graphs_) total += static_cast<double>(g.num_nodes());
    return total / static_cast<double>(graphs_.size());
  }

  /// Size of the shared categorical vocabulary (max over graphs).
  std::size_t vocabulary_size() const {
    std::size_t v = 0;
    for (const auto& g : graphs_) v = std::max(v, g.categorical().vocabulary_size);
    return v;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<Graph> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(graphs_.at(i));
    return Dataset(std::move(out), num_classes_, name_);
  }

 private:
  std::vector<Graph> graphs_;
  std::size_t num_classes_;
  std::string name_;
};

}  // namespace ginlab
