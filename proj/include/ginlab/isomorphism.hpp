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

// Exact isomorphism oracle for tiny graphs. It searches node bijections
// directly, so it is the ground truth the WL and GNN verdicts are checked
// against.

#pragma once

#include <algorithm>
#include <variant>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/graph.hpp"

namespace ginlab {

inline constexpr std::size_t kMaxOracleNodes = 10;

namespace detail {

inline bool same_node_features(const Graph& a, NodeId u, const Graph& b, NodeId v) {
  const auto& fa = a.features();
  const auto& fb = b.features();
  if (fa.index() != fb.index()) return false;
  if (const auto* ca = std::get_if<CategoricalFeatures>(&fa)) {
    return ca->labels[u] == std::get<CategoricalFeatures>(fb).labels[v];
  }
  const auto& da = std::get<DenseFeatures>(fa);
  const auto& db = std::get<DenseFeatures>(fb);
  if (da.dimension != db.dimension) return false;
  return std::equal(da.values.begin() + u * da.dimension, da.values.begin() + (u + 1) * da.dimension,
                    db.values.begin() + v * db.dimension);
}

class BijectionSearch {
 public:
  BijectionSearch(const Graph& a, const Graph& b)
      : a_(a), b_(b), map_(a.num_nodes()), used_(b.num_nodes(), false) {}

  bool run() { return extend(0); }

 private:
  bool extend(NodeId u) {
    if (u == a_.num_nodes()) return true;
    for (NodeId v = 0; v < b_.num_nodes(); ++v) {
      if (used_[v] || a_.degree(u) != b_.degree(v) || !same_node_features(a_, u, b_, v)) continue;
      if (a_.has_edge(u, u) != b_.has_edge(v, v)) continue;
      bool consistent = true;
      for (NodeId w = 0; w < u && consistent; ++w) {
        consistent = a_.has_edge(u, w) == b_.has_edge(v, map_[w]);
      }
      if (!consistent) continue;
      map_[u] = v;
      used_[v] = true;
      if (extend(u + 1)) return true;
      used_[v] = false;
    }
    return false;
  }

  const Graph& a_;
  const Graph& b_;
  std::vector<NodeId> map_;
  std::vector<bool> used_;
};

}  // namespace detail

/// True iff a node bijection maps the edges and node features of `a` exactly
/// onto those of `b`. Limited to kMaxOracleNodes nodes.
inline bool brute_force_isomorphic(const Graph& a, const Graph& b) {
  if (a.num_nodes() > kMaxOracleNodes || b.num_nodes() > kMaxOracleNodes) {
    throw PreconditionError("brute-force isomorphism is limited to " +
                            std::to_string(kMaxOracleNodes) + " nodes");
  }
  if (a.num_nodes() != b.num_nodes() || a.num_edges() != b.num_edges()) return false;
  if (a.features().index() != b.features().index()) return false;
  return detail::BijectionSearch(a, b).run();
}

}  // namespace ginlab
