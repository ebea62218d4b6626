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

// Synthetic graphs: the classic aggregator counterexamples, seeded random
// graphs, exhaustive enumeration of small connected graphs and the
// structural surrogate datasets used at desk scale.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/graph.hpp"

namespace ginlab {

/// Uniform double in [0, 1) from the top 53 bits of one mt19937_64 draw.
/// Unlike std::uniform_real_distribution this is identical on every stdlib.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; portable across stdlibs.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Fisher-Yates shuffle driven by uniform_index.
template <class T>
void portable_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph::unlabeled(n, edges);
}

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::unlabeled(n, edges);
}

/// Star with `leaves` leaves; node 0 is the center.
inline Graph star_graph(std::size_t leaves) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return Graph::unlabeled(leaves + 1, edges);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return Graph::unlabeled(n, edges);
}

/// Disjoint union; node ids of `b` are shifted by a.num_nodes(). Both graphs
/// must be categorical; the result keeps a's label.
inline Graph disjoint_union(const Graph& a, const Graph& b) {
  const auto& fa = a.categorical();
  const auto& fb = b.categorical();
  std::vector<Edge> edges = a.edges();
  for (auto [u, v] : b.edges()) edges.emplace_back(u + a.num_nodes(), v + a.num_nodes());
  CategoricalFeatures f{fa.labels, std::max(fa.vocabulary_size, fb.vocabulary_size)};
  f.labels.insert(f.labels.end(), fb.labels.begin(), fb.labels.end());
  return Graph::from_edges(a.num_nodes() + b.num_nodes(), edges, std::move(f), a.label());
}

/// G(n, p) with a fixed seed: each pair i < j is an edge with probability p.
inline Graph random_graph(std::size_t n, double edge_prob, std::uint64_t seed) {
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw PreconditionError("edge probability must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uniform01(rng) < edge_prob) edges.emplace_back(i, j);
    }
  }
  return Graph::unlabeled(n, edges);
}

struct CounterexamplePair {
  std::string name;
  Graph first;
  Graph second;
  NodeId focal_first = 0;
  NodeId focal_second = 0;
};

/// Node colors used by the colored counterexamples.
enum CounterexampleColor : std::size_t { kBlue = 0, kGreen = 1, kRed = 2 };

/// Pairs of structures that mean and/or max aggregation cannot tell apart
/// at the focal nodes:
///   fig3a     v sees {a, a}, v' sees {a, a, a}; all features equal
///   fig3b     v sees {g, r}, v' sees {g, r, r}
///   fig3c     v sees {g, r}, v' sees {g, g, r, r}; the second graph is
///             K_{2,4}, so every node keeps its neighbor distribution and the
///             graph-level color proportions match as well
///   c6_vs_2c3 6-cycle vs two disjoint triangles, uniform features
///   s3_vs_p4  star with 3 leaves vs path on 4 nodes, uniform features
inline std::vector<CounterexamplePair> counterexample_pairs() {
  std::vector<CounterexamplePair> pairs;
  pairs.push_back({"fig3a", Graph::unlabeled(3, {{0, 1}, {0, 2}}), star_graph(3), 0, 0});

  const auto colored = [](std::size_t n, std::initializer_list<Edge> edges,
                          std::vector<std::size_t> colors) {
    return Graph::from_edges(n, edges, CategoricalFeatures{std::move(colors), 3});
  };
  const Graph v_gr = colored(3, {{0, 1}, {0, 2}}, {kBlue, kGreen, kRed});
  pairs.push_back(
      {"fig3b", v_gr, colored(4, {{0, 1}, {0, 2}, {0, 3}}, {kBlue, kGreen, kRed, kRed}), 0, 0});
  pairs.push_back({"fig3c", v_gr,
                   colored(6,
                           {{0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}, {1, 3}, {1, 4}, {1, 5}},
                           {kBlue, kBlue, kGreen, kGreen, kRed, kRed}),
                   0, 0});
  pairs.push_back({"c6_vs_2c3", cycle_graph(6), disjoint_union(cycle_graph(3), cycle_graph(3)), 0, 0});
  pairs.push_back({"s3_vs_p4", star_graph(3), path_graph(4), 0, 1});
  return pairs;
}

inline CounterexamplePair find_pair(const std::vector<CounterexamplePair>& pairs,
                                   const std::string& name) {
  for (const auto& p : pairs) {
    if (p.name == name) return p;
  }
  throw PreconditionError("unknown counterexample pair '" + name + "'");
}

inline constexpr std::size_t kMaxEnumerationNodes = 7;

/// Calls `visit` once per connected graph on the labeled vertex set 0..n-1
/// (no deduplication up to isomorphism). Edge subsets are visited in
/// increasing bitmask order over the lexicographic pair list.
inline void for_each_connected_graph(std::size_t n, const std::function<void(const Graph&)>& visit) {
  if (n > kMaxEnumerationNodes) {
    throw PreconditionError("enumeration is limited to n <= " + std::to_string(kMaxEnumerationNodes));
  }
  if (n == 0) return;
  std::vector<Edge> all;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
  }
  const std::uint64_t subsets = std::uint64_t{1} << all.size();
  std::vector<std::uint32_t> adj(n);
  std::vector<Edge> edges;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    std::fill(adj.begin(), adj.end(), 0u);
    for (std::size_t e = 0; e < all.size(); ++e) {
      if (mask >> e & 1u) {
        adj[all[e].first] |= 1u << all[e].second;
        adj[all[e].second] |= 1u << all[e].first;
      }
    }
    std::uint32_t reached = 1u, frontier = 1u;
    while (frontier) {
      std::uint32_t next = 0;
      for (std::size_t v = 0; v < n; ++v) {
        if (frontier >> v & 1u) next |= adj[v];
      }
      frontier = next & ~reached;
      reached |= next;
    }
    if (reached != (std::uint32_t{1} << n) - 1) continue;
    edges.clear();
    for (std::size_t e = 0; e < all.size(); ++e) {
      if (mask >> e & 1u) edges.push_back(all[e]);
    }
    visit(Graph::unlabeled(n, edges));
  }
}

inline std::vector<Graph> enumerate_connected_graphs(std::size_t n) {
  std::vector<Graph> out;
  for_each_connected_graph(n, [&](const Graph& g) { out.push_back(g); });
  return out;
}

/// Class 0: cycles C_n; class 1: stars on n nodes, n cycling through
/// [min_nodes, min_nodes + 9]. Both classes share the node-count profile.
/// Features are uniform; apply degree_onehot_features for degree inputs.
inline Dataset cycles_vs_stars(std::size_t per_class = 50, std::size_t min_nodes = 4) {
  std::vector<Graph> graphs;
  for (std::size_t i = 0; i < per_class; ++i) {
    const std::size_t n = min_nodes + i % 10;
    graphs.push_back(cycle_graph(n).with_label(0));
    graphs.push_back(star_graph(n - 1).with_label(1));
  }
  return Dataset(std::move(graphs), 2, "cycles_vs_stars");
}

/// Random recursive tree on n nodes: node i attaches to a uniform earlier node.
inline std::vector<Edge> random_tree_edges(std::size_t n, std::mt19937_64& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(uniform_index(rng, i), i);
  return edges;
}

/// Uniform-feature two-class surrogate for the social benchmarks. Graphs come
/// in pairs sharing a node count n in [min_nodes, max_nodes]: class 0 is a
/// random tree, class 1 a random tree plus `extra_edges` random chords.
inline Dataset structural_surrogate(std::size_t num_graphs = 200, std::uint64_t seed = 0,
                                   std::size_t min_nodes = 12, std::size_t max_nodes = 20,
                                   std::size_t extra_edges = 4) {
  if (num_graphs % 2 != 0) throw PreconditionError("surrogate needs an even graph count");
  if (min_nodes < 5 || max_nodes < min_nodes) throw PreconditionError("bad node range");
  std::mt19937_64 rng(seed);
  std::vector<Graph> graphs;
  for (std::size_t i = 0; i < num_graphs / 2; ++i) {
    const std::size_t n = min_nodes + uniform_index(rng, max_nodes - min_nodes + 1);
    graphs.push_back(Graph::unlabeled(n, random_tree_edges(n, rng)).with_label(0));
    auto edges = random_tree_edges(n, rng);
    std::size_t added = 0;
    while (added < extra_edges) {
      const std::size_t u = uniform_index(rng, n), v = uniform_index(rng, n);
      if (u == v) continue;
      bool exists = false;
      for (auto [a, b] : edges) exists |= (a == u && b == v) || (a == v && b == u);
      if (exists) continue;
      edges.emplace_back(u, v);
      ++added;
    }
    graphs.push_back(Graph::unlabeled(n, edges).with_label(1));
  }
  return Dataset(std::move(graphs), 2, "structural_surrogate");
}

}  // namespace ginlab
