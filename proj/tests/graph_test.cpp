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

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "ginlab/dataset_io.hpp"
#include "ginlab/features.hpp"
#include "ginlab/graph.hpp"
#include "ginlab/isomorphism.hpp"
#include "ginlab/multiset.hpp"
#include "ginlab/synth.hpp"
#include "gtest/gtest.h"

namespace fs = std::filesystem;
using namespace ginlab;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ginlab_graph_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

// Triangle (graph 1, nodes 1-3) and path 4-5-6 (graph 2).
fs::path write_two_graph_fixture() {
  const auto dir = scratch_dir("two");
  write_file(dir / "TOY_A.txt", "1, 2\n2, 1\n2,3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n5,  6\n6, 5\n");
  write_file(dir / "TOY_graph_indicator.txt", "1\n1\n1\n2\n2\n2\n");
  write_file(dir / "TOY_graph_labels.txt", "7\n-3\n");
  write_file(dir / "TOY_node_labels.txt", "5\n5\n9\n0\n5\n0\n");
  return dir;
}

// Independent connectivity oracle: union-find over the chosen edges.
std::size_t count_connected_labeled(std::size_t n) {
  std::vector<std::pair<int, int>> all;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
  std::size_t count = 0;
  for (std::uint64_t mask = 0; mask < (1ull << all.size()); ++mask) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::size_t components = n;
    for (std::size_t e = 0; e < all.size(); ++e) {
      if (!(mask >> e & 1)) continue;
      int a = find(all[e].first), b = find(all[e].second);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    count += components == 1 ? 1 : 0;
  }
  return count;
}

}  // namespace

TEST(Graph, FromEdgesSymmetrizesAndDeduplicates) {
  const auto g = Graph::unlabeled(3, {{0, 1}, {1, 0}, {1, 2}, {0, 1}});
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(Graph, RejectsInvariantViolations) {
  EXPECT_THROW(Graph::unlabeled(2, {{0, 2}}), GraphInvariantError);
  EXPECT_THROW(Graph::unlabeled(2, {{1, 1}}), GraphInvariantError);
  EXPECT_THROW(Graph({{1}, {}}, uniform_labels(2)), GraphInvariantError);        // asymmetric
  EXPECT_THROW(Graph({{1, 1}, {0, 0}}, uniform_labels(2)), GraphInvariantError);  // duplicate
  EXPECT_THROW(Graph::from_edges(2, {{0, 1}}, uniform_labels(3)), GraphInvariantError);
  EXPECT_THROW(Graph::from_edges(2, {{0, 1}}, CategoricalFeatures{{0, 3}, 2}), GraphInvariantError);
  EXPECT_THROW(Graph::from_edges(2, {{0, 1}}, DenseFeatures{{1.0, 2.0, 3.0}, 2}), GraphInvariantError);
}

TEST(Graph, SelfLoopsNeedTheFlag) {
  const auto g = Graph::from_edges(2, {{0, 0}, {0, 1}}, uniform_labels(2), std::nullopt,
                                   Graph::Options{.allow_self_loops = true});
  EXPECT_TRUE(g.has_edge(0, 0));
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.degree(0), 2u);
}

TEST(Graph, PermutationPreservesStructure) {
  const auto g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}}, CategoricalFeatures{{0, 1, 2, 3}, 4});
  const std::vector<NodeId> perm{3, 1, 0, 2};
  const auto p = g.permuted(perm);
  for (auto [u, v] : g.edges()) EXPECT_TRUE(p.has_edge(perm[u], perm[v]));
  for (NodeId v = 0; v < 4; ++v) EXPECT_EQ(p.categorical().labels[perm[v]], g.categorical().labels[v]);
  EXPECT_TRUE(brute_force_isomorphic(g, p));
}

TEST(Multiset, EqualityIgnoresInsertionOrder) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> items;
    for (int i = 0; i < 12; ++i) items.push_back(static_cast<int>(rng() % 4));
    auto shuffled = items;
    portable_shuffle(shuffled, rng);
    const auto a = Multiset<int>::from_range(items);
    const auto b = Multiset<int>::from_range(shuffled);
    EXPECT_EQ(a, b);
    std::size_t total = 0;
    for (const auto& [x, m] : a) {
      EXPECT_GE(m, 1u);
      total += m;
    }
    EXPECT_EQ(a.size(), total);
    EXPECT_EQ(a.size(), items.size());
  }
  EXPECT_NE((Multiset<char>{'g', 'r'}), (Multiset<char>{'g', 'r', 'r'}));
  EXPECT_EQ((Multiset<char>{'g', 'r'}).underlying_set(), (Multiset<char>{'g', 'r', 'r'}).underlying_set());
}

TEST(LoadTud, TwoGraphFixtureMatchesExactly) {
  const auto ds = load_tud_dataset(write_two_graph_fixture(), "TOY");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.num_classes(), 2u);
  // Graph labels {-3, 7} remap to {0, 1}.
  EXPECT_EQ(ds[0].label(), 1u);
  EXPECT_EQ(ds[1].label(), 0u);
  EXPECT_EQ(ds[0].edges(), (std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_EQ(ds[1].edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
  // Node labels {0, 5, 9} remap to {0, 1, 2}.
  EXPECT_EQ(ds[0].categorical().labels, (std::vector<std::size_t>{1, 1, 2}));
  EXPECT_EQ(ds[1].categorical().labels, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(ds.vocabulary_size(), 3u);
}

TEST(LoadTud, SingleNodeGraphWithEmptyEdgeFile) {
  const auto dir = scratch_dir("single");
  write_file(dir / "ONE_A.txt", "");
  write_file(dir / "ONE_graph_indicator.txt", "1\n");
  write_file(dir / "ONE_graph_labels.txt", "0\n");
  const auto ds = load_tud_dataset(dir, "ONE");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].num_nodes(), 1u);
  EXPECT_EQ(ds[0].num_edges(), 0u);
  EXPECT_EQ(ds[0].categorical().vocabulary_size, 1u);
}

TEST(LoadTud, MissingFileIsNamed) {
  const auto dir = scratch_dir("missing");
  write_file(dir / "X_A.txt", "");
  write_file(dir / "X_graph_labels.txt", "0\n");
  try {
    load_tud_dataset(dir, "X");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("X_graph_indicator.txt"), std::string::npos);
  }
}

TEST(LoadTud, CrossGraphEdgeReportsLineNumber) {
  const auto dir = scratch_dir("cross");
  write_file(dir / "X_A.txt", "1, 2\n2, 1\n2, 3\n");
  write_file(dir / "X_graph_indicator.txt", "1\n1\n2\n");
  write_file(dir / "X_graph_labels.txt", "0\n1\n");
  try {
    load_tud_dataset(dir, "X");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("X_A.txt:3"), std::string::npos) << e.what();
  }
  write_file(dir / "X_A.txt", "1, 2\n1, 9\n");
  EXPECT_THROW(load_tud_dataset(dir, "X"), FormatError);
}

TEST(LoadTud, Mutag) {
  const auto ds = load_tud_dataset(fs::path(GINLAB_DATA_DIR) / "MUTAG", "MUTAG");
  EXPECT_EQ(ds.size(), 188u);
  EXPECT_EQ(ds.num_classes(), 2u);
  EXPECT_NEAR(ds.average_nodes(), 17.9, 0.1);
  EXPECT_EQ(ds.vocabulary_size(), 7u);
}

TEST(JsonFormat, RoundTripsADataset) {
  const auto ds = degree_onehot_features(cycles_vs_stars(3), 8);
  const auto path = scratch_dir("json") / "ds.json";
  save_json_dataset(ds, path);
  const auto back = load_json_dataset(path);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back[i], ds[i]);
  EXPECT_EQ(back.num_classes(), 2u);
}

TEST(JsonFormat, NullNodeLabelsMeanUniform) {
  const auto graphs = graphs_from_json(nlohmann::json::parse(
      R"({"graphs":[{"n":3,"edges":[[0,1],[1,2]],"node_labels":null,"label":0}],"num_classes":1})"));
  ASSERT_EQ(graphs.size(), 1u);
  EXPECT_EQ(graphs[0].categorical().labels, (std::vector<std::size_t>{0, 0, 0}));
  EXPECT_THROW(graphs_from_json(nlohmann::json::parse(R"({"graphs":[{"n":2,"edges":[[0,5]]}]})")),
               FormatError);
}

TEST(Features, DegreeOneHot) {
  const auto star = degree_onehot_features(star_graph(4), 10);
  EXPECT_EQ(star.categorical().labels, (std::vector<std::size_t>{4, 1, 1, 1, 1}));
  EXPECT_EQ(star.categorical().vocabulary_size, 11u);
  EXPECT_EQ(degree_onehot_features(Graph::unlabeled(1, {}), 10).categorical().labels[0], 0u);
  EXPECT_EQ(degree_onehot_features(star_graph(12), 10).categorical().labels[0], 10u);
  EXPECT_THROW(degree_onehot_features(star_graph(2), 0), PreconditionError);
}

TEST(Features, UniformAfterDegreeHasVocabularyOne) {
  const auto ds = uniform_features(degree_onehot_features(structural_surrogate(20, 5)));
  for (const auto& g : ds.graphs()) {
    EXPECT_EQ(g.categorical().vocabulary_size, 1u);
    for (auto l : g.categorical().labels) EXPECT_EQ(l, 0u);
  }
  const auto empty = uniform_features(Graph());
  EXPECT_EQ(empty.num_nodes(), 0u);
  EXPECT_EQ(empty.categorical().vocabulary_size, 1u);
}

TEST(Synth, CounterexamplePairs) {
  const auto pairs = counterexample_pairs();
  const auto& a = find_pair(pairs, "fig3a");
  EXPECT_EQ(a.first.degree(a.focal_first), 2u);
  EXPECT_EQ(a.second.degree(a.focal_second), 3u);
  for (auto l : a.first.categorical().labels) EXPECT_EQ(l, 0u);
  for (auto l : a.second.categorical().labels) EXPECT_EQ(l, 0u);

  const auto neighbor_colors = [](const Graph& g, NodeId v) {
    Multiset<std::size_t> m;
    for (NodeId u : g.neighbors(v)) m.insert(g.categorical().labels[u]);
    return m;
  };
  const auto& b = find_pair(pairs, "fig3b");
  EXPECT_EQ(neighbor_colors(b.first, 0), (Multiset<std::size_t>{kGreen, kRed}));
  EXPECT_EQ(neighbor_colors(b.second, 0), (Multiset<std::size_t>{kGreen, kRed, kRed}));
  const auto& c = find_pair(pairs, "fig3c");
  const auto x1 = neighbor_colors(c.first, 0);
  const auto x2 = neighbor_colors(c.second, 0);
  for (const auto& [color, m] : x1) EXPECT_EQ(x2.multiplicity(color), 2 * m);
  EXPECT_EQ(x2.size(), 4u);

  const auto& r = find_pair(pairs, "c6_vs_2c3");
  EXPECT_EQ(r.first.num_nodes(), 6u);
  EXPECT_EQ(r.second.num_nodes(), 6u);
  for (NodeId v = 0; v < 6; ++v) {
    EXPECT_EQ(r.first.degree(v), 2u);
    EXPECT_EQ(r.second.degree(v), 2u);
  }
}

TEST(Synth, RandomGraph) {
  const auto empty = random_graph(5, 0.0, 7);
  EXPECT_EQ(empty.num_nodes(), 5u);
  EXPECT_EQ(empty.num_edges(), 0u);
  EXPECT_EQ(random_graph(4, 1.0, 0), complete_graph(4));
  EXPECT_EQ(random_graph(8, 0.3, 42), random_graph(8, 0.3, 42));
  EXPECT_THROW(random_graph(3, 1.5, 0), PreconditionError);
}

TEST(Synth, EnumerationCountsMatchUnionFindOracle) {
  EXPECT_EQ(enumerate_connected_graphs(2).size(), 1u);
  EXPECT_EQ(count_connected_labeled(3), 4u);
  EXPECT_EQ(count_connected_labeled(4), 38u);
  for (std::size_t n = 1; n <= 5; ++n) {
    EXPECT_EQ(enumerate_connected_graphs(n).size(), count_connected_labeled(n)) << "n=" << n;
  }
  EXPECT_THROW(enumerate_connected_graphs(8), PreconditionError);
}

TEST(Oracle, Examples) {
  const auto& r = find_pair(counterexample_pairs(), "c6_vs_2c3");
  EXPECT_FALSE(brute_force_isomorphic(r.first, r.second));
  const auto tri = cycle_graph(3);
  const std::vector<NodeId> perm{2, 0, 1};
  EXPECT_TRUE(brute_force_isomorphic(tri, tri.permuted(perm)));
  EXPECT_TRUE(brute_force_isomorphic(random_graph(7, 0.4, 11), random_graph(7, 0.4, 11)));
  EXPECT_THROW(brute_force_isomorphic(cycle_graph(11), cycle_graph(11)), PreconditionError);
}

TEST(Oracle, RespectsNodeLabels) {
  const auto a = Graph::from_edges(2, {{0, 1}}, CategoricalFeatures{{0, 1}, 2});
  const auto b = Graph::from_edges(2, {{0, 1}}, CategoricalFeatures{{1, 1}, 2});
  EXPECT_FALSE(brute_force_isomorphic(a, b));
  EXPECT_TRUE(brute_force_isomorphic(a, a.permuted(std::vector<NodeId>{1, 0})));
}

TEST(Oracle, IsAnEquivalenceRelation) {
  std::vector<Graph> pool;
  for (std::uint64_t s = 0; s < 12; ++s) pool.push_back(random_graph(5, 0.5, s));
  std::mt19937_64 rng(9);
  for (int i = 0; i < 6; ++i) {
    std::vector<NodeId> perm{0, 1, 2, 3, 4};
    portable_shuffle(perm, rng);
    pool.push_back(pool[i].permuted(perm));
  }
  for (const auto& a : pool) {
    EXPECT_TRUE(brute_force_isomorphic(a, a));
    for (const auto& b : pool) {
      const bool ab = brute_force_isomorphic(a, b);
      EXPECT_EQ(ab, brute_force_isomorphic(b, a));
      if (!ab) continue;
      for (const auto& c : pool) {
        if (brute_force_isomorphic(b, c)) EXPECT_TRUE(brute_force_isomorphic(a, c));
      }
    }
  }
}
