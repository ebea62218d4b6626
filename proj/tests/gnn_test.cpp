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

#include <numeric>

#include "ginlab/features.hpp"
#include "ginlab/gnn.hpp"
#include "ginlab/isomorphism.hpp"
#include "ginlab/synth.hpp"
#include "ginlab/wl.hpp"
#include "gradcheck.hpp"
#include "gtest/gtest.h"

using namespace ginlab;

namespace {

std::vector<GnnConfig> all_presets() {
  std::vector<GnnConfig> out;
  for (const auto& n : preset_names()) out.push_back(preset(n));
  return out;
}

Tensor row(const Tensor& t, std::size_t i) {
  const auto r = t.row(i);
  return Tensor(1, t.cols(), std::vector<double>(r.begin(), r.end()));
}

// Graph vectors of two graphs under one model, in eval mode.
std::pair<Tensor, Tensor> embed_pair(GnnModel& model, const Graph& a, const Graph& b) {
  return {model.graph_vectors(make_batch(a, model.input_dim())),
          model.graph_vectors(make_batch(b, model.input_dim()))};
}

double distance(const Tensor& a, const Tensor& b) { return euclidean_distance(a.values(), b.values()); }

// Eval-mode output of layer 1 for every node of `g`.
Tensor first_layer(GnnModel& model, const Graph& g) {
  const auto batch = make_batch(g, model.input_dim());
  Tape t;
  return model.layer_forward(t, 1, t.constant(batch.features), batch, false).value();
}

}  // namespace

TEST(Config, PresetsAndAliases) {
  EXPECT_EQ(preset_names().size(), 7u);
  EXPECT_EQ(preset("GIN-0").name, "gin-0");
  EXPECT_EQ(preset("GIN-\xCE\xB5").epsilon_mode, EpsilonMode::Learnable);
  EXPECT_EQ(preset("Mean-1-Layer (GCN)").self_inclusion, SelfInclusion::GcnStyle);
  EXPECT_EQ(preset("Max\xE2\x80\x93" "1-Layer").name, "graphsage");
  EXPECT_EQ(preset("Sum-1-Layer").combine, Combine::OneLayer);
  try {
    preset("lstm");
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("gin-0, gin-eps"), std::string::npos);
  }
}

TEST(Config, JsonRoundTrip) {
  for (auto c : all_presets()) {
    c.dropout = 0.5;
    c.hidden_dim = 16;
    EXPECT_EQ(GnnConfig::from_json(c.to_json()), c);
    EXPECT_EQ(resolve_config(c.to_json().dump()), c);
  }
  EXPECT_THROW(GnnConfig::from_json(nlohmann::json::parse(R"({"aggregator":"lstm"})")), FormatError);
  EXPECT_THROW(GnnConfig::from_json(nlohmann::json::parse(R"({"num_layers":0})")), PreconditionError);
}

TEST(Batch, BlockDiagonalLayout) {
  const auto a = Graph::from_edges(2, {{0, 1}}, CategoricalFeatures{{0, 1}, 2});
  const auto b = Graph::from_edges(3, {{0, 2}}, CategoricalFeatures{{1, 1, 0}, 2});
  const Graph* gs[] = {&a, &b};
  const auto batch = make_batch(gs, 2);
  EXPECT_EQ(batch.num_nodes, 5u);
  EXPECT_EQ(batch.graphs.offsets, (std::vector<std::size_t>{0, 2, 5}));
  EXPECT_EQ(batch.neighbors.index, (std::vector<std::size_t>{1, 0, 4, 2}));
  EXPECT_EQ(batch.closed_neighbors.index, (std::vector<std::size_t>{0, 1, 0, 1, 2, 4, 3, 2, 4}));
  EXPECT_EQ(batch.features, Tensor::from_rows({{1, 0}, {0, 1}, {0, 1}, {0, 1}, {1, 0}}));
  EXPECT_TRUE(batch.labels.empty());
  EXPECT_THROW(make_batch(a, 1), DimensionError);
}

TEST(Model, InputDimensionMismatch) {
  GnnModel m(preset("gin-0"), 3, 2, 0);
  Tape t;
  EXPECT_THROW(m.forward(t, make_batch(cycle_graph(3), 1), false), DimensionError);
}

TEST(GinLayer, IsolatedNodeWithIdentityMlp) {
  GnnConfig c = preset("gin-0");
  c.num_layers = 2;
  c.hidden_dim = 3;
  c.use_batchnorm = false;
  GnnModel m(c, 3, 2, 0);
  m.layer(1).lin1.weight.value = Tensor::identity(3);
  m.layer(1).lin2.weight.value = Tensor::identity(3);
  const auto g = Graph::from_edges(1, {}, CategoricalFeatures{{2}, 3});
  EXPECT_EQ(first_layer(m, g), Tensor::from_rows({{0, 0, 1}}));
}

TEST(GinLayer, SumSeparatesTwoFromThreeCopies) {
  const auto p = find_pair(counterexample_pairs(), "fig3a");
  GnnModel m(preset("gin-0"), 1, 2, 0);
  const auto pre = [&](const Graph& g, NodeId v) {
    const auto batch = make_batch(g, 1);
    Tape t;
    const Var h = t.constant(batch.features);
    return add(h, m.aggregate(t, 1, h, batch)).value()(v, 0);
  };
  EXPECT_EQ(pre(p.first, p.focal_first), 3.0);   // (1 + 0) f(a) + 2 f(a)
  EXPECT_EQ(pre(p.second, p.focal_second), 4.0);  // (1 + 0) f(a) + 3 f(a)
}

TEST(GinLayer, LearnableEpsilonMovesAfterOneStep) {
  GnnModel m(preset("gin-eps"), 1, 2, 3);
  const Dataset ds({star_graph(3).with_label(0), path_graph(4).with_label(1)}, 2, "tiny");
  const std::size_t idx[] = {0, 1};
  const auto batch = make_batch(ds, idx, 1);
  auto params = m.parameters();
  Adam opt(params);
  opt.zero_grad();
  Tape t;
  t.backward(softmax_cross_entropy(m.forward(t, batch, true).logits, batch.labels));
  EXPECT_NE(m.layer(1).epsilon.grad(0, 0), 0.0);
  opt.step(0);
  EXPECT_NE(m.layer(1).epsilon.value(0, 0), 0.0);
}

TEST(GcnLayer, IsolatedNodeAndFig3a) {
  GnnModel m(preset("gcn"), 1, 2, 1);
  const auto iso = Graph::unlabeled(1, {});
  const auto batch = make_batch(iso, 1);
  Tape t;
  const Var h = t.constant(batch.features);
  EXPECT_EQ(m.aggregate(t, 1, h, batch).value(), batch.features);

  const auto p = find_pair(counterexample_pairs(), "fig3a");
  EXPECT_EQ(row(first_layer(m, p.first), p.focal_first), row(first_layer(m, p.second), p.focal_second));
  const auto out = first_layer(m, cycle_graph(5));
  for (std::size_t i = 1; i < 5; ++i) EXPECT_EQ(row(out, i), row(out, 0));
}

TEST(SageLayer, MaxIgnoresMultiplicity) {
  GnnModel m(preset("graphsage"), 3, 2, 4);
  const auto p = find_pair(counterexample_pairs(), "fig3b");
  const auto agg = [&](const Graph& g) {
    const auto batch = make_batch(g, 3);
    Tape t;
    return row(m.aggregate(t, 1, t.constant(batch.features), batch).value(), 0);
  };
  EXPECT_EQ(agg(p.first), agg(p.second));
  EXPECT_EQ(row(first_layer(m, p.first), 0), row(first_layer(m, p.second), 0));

  // Single neighbor: the aggregate is that neighbor's transformed vector.
  const auto edge = Graph::from_edges(2, {{0, 1}}, CategoricalFeatures{{0, 2}, 3});
  const auto batch = make_batch(edge, 3);
  Tape t;
  const Var h = t.constant(batch.features);
  const auto transformed = relu(m.layer(1).pool(t, h)).value();
  EXPECT_EQ(row(m.aggregate(t, 1, h, batch).value(), 0), row(transformed, 1));
}

TEST(SageLayer, DuplicatedNeighborLeavesOutputUnchanged) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t leaves = 2 + uniform_index(rng, 3);
    std::vector<std::size_t> labels{0};
    std::vector<Edge> edges;
    for (std::size_t i = 1; i <= leaves; ++i) {
      labels.push_back(uniform_index(rng, 3));
      edges.emplace_back(0, i);
    }
    const auto g = Graph::from_edges(leaves + 1, edges, CategoricalFeatures{labels, 3});
    labels.push_back(labels[1 + uniform_index(rng, leaves)]);
    edges.emplace_back(0, leaves + 1);
    const auto dup = Graph::from_edges(leaves + 2, edges, CategoricalFeatures{labels, 3});
    GnnModel m(preset("graphsage"), 3, 2, trial);
    EXPECT_EQ(row(first_layer(m, g), 0), row(first_layer(m, dup), 0));
  }
}

TEST(Readout, SingleNodeIsConcatenationOfLayers) {
  GnnModel m(preset("gin-0"), 2, 2, 5);
  const auto g = Graph::from_edges(1, {}, CategoricalFeatures{{1}, 2});
  const auto batch = make_batch(g, 2);
  Tape t;
  const auto f = m.forward(t, batch, false);
  std::vector<double> expected;
  for (Var h : f.layers) expected.insert(expected.end(), h.value().values().begin(), h.value().values().end());
  EXPECT_EQ(f.graph_vector.value().values(), expected);
}

TEST(Readout, DisjointCopiesDoubleTheSum) {
  const auto g = random_graph(6, 0.5, 12);
  for (const auto& c : all_presets()) {
    GnnModel m(c, 1, 2, 2);
    const auto [one, two] = embed_pair(m, g, disjoint_union(g, g));
    for (std::size_t j = 0; j < one.cols(); ++j) EXPECT_NEAR(two(0, j), 2 * one(0, j), 1e-12 * (1 + std::abs(one(0, j))));
  }
}

TEST(Readout, MeanCollapsesRegularPair) {
  const auto p = find_pair(counterexample_pairs(), "c6_vs_2c3");
  for (auto c : all_presets()) {
    c.readout = Readout::MeanConcat;
    GnnModel m(c, 1, 2, 9);
    const auto [a, b] = embed_pair(m, p.first, p.second);
    EXPECT_EQ(a, b) << c.name;
  }
}

TEST(Forward, Fig3cMeanCollidesSumSeparates) {
  const auto p = find_pair(counterexample_pairs(), "fig3c");
  GnnConfig mean = preset("mean-mlp");
  mean.readout = Readout::MeanConcat;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GnnModel mm(mean, 3, 2, seed);
    const auto [a, b] = embed_pair(mm, p.first, p.second);
    EXPECT_LT(distance(a, b), 1e-12);
    GnnModel gin(preset("gin-0"), 3, 2, seed);
    const auto [c, d] = embed_pair(gin, p.first, p.second);
    EXPECT_GT(distance(c, d), 1e-6) << "seed " << seed;
  }
}

TEST(Forward, PermutationInvarianceIsExact) {
  std::mt19937_64 rng(10);
  for (const auto& c : all_presets()) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto g = degree_onehot_features(random_graph(8, 0.4, 30 + s), 7);
      std::vector<NodeId> perm(8);
      std::iota(perm.begin(), perm.end(), 0);
      portable_shuffle(perm, rng);
      GnnModel m(c, 8, 3, s);
      EXPECT_EQ(m.logits(make_batch(g, 8)), m.logits(make_batch(g.permuted(perm), 8))) << c.name;
      const auto [a, b] = embed_pair(m, g, g.permuted(perm));
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Forward, SumScaledByInverseDegreeEqualsMean) {
  for (const auto& g : {cycle_graph(6), complete_graph(5), disjoint_union(cycle_graph(3), cycle_graph(4))}) {
    const std::size_t d = g.degree(0);
    std::mt19937_64 rng(d);
    std::vector<double> values(g.num_nodes() * 4);
    for (double& v : values) v = uniform01(rng);
    const auto dense = g.with_features(DenseFeatures{values, 4});
    for (auto name : {"mean-mlp", "gcn"}) {
      GnnModel m(preset(name), 4, 2, 1);
      const auto batch = make_batch(dense, 4);
      Tape t;
      const Var h = t.constant(batch.features);
      const Var mean = m.layer_forward(t, 1, h, batch, false);
      const auto& segs = preset(name).self_inclusion == SelfInclusion::GcnStyle ? batch.closed_neighbors : batch.neighbors;
      const double size = static_cast<double>(segs.size(0));
      const Var scaled = m.combine(t, 1, h, scale(row_sum(h, segs), 1.0 / size), false);
      EXPECT_EQ(mean.value(), scaled.value()) << name;
    }
  }
}

TEST(Forward, GradientCheckFullModels) {
  const auto g = Graph::from_edges(3, {{0, 1}, {1, 2}}, CategoricalFeatures{{0, 1, 1}, 2}, 1);
  const auto h = Graph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}}, CategoricalFeatures{{1, 0, 0}, 2}, 0);
  const Graph* gs[] = {&g, &h};
  const auto batch = make_batch(gs, 2);
  for (auto c : all_presets()) {
    c.num_layers = 3;
    c.hidden_dim = 4;
    GnnModel m(c, 2, 2, 7);
    for (Parameter* p : m.parameters()) {
      if (p->name.find(".eps") != std::string::npos) p->value(0, 0) = 0.3;
    }
    const auto r = ginlab::testing::gradient_check(
        m.parameters(),
        [&](Tape& t) { return softmax_cross_entropy(m.forward(t, batch, true).logits, batch.labels); }, 20, 1);
    EXPECT_LT(r.max_relative_error, 1e-4) << c.name << " worst " << r.worst;
  }
}

TEST(IdealGin, MatchesWlVerdicts) {
  EXPECT_EQ(IdealGin(8).embed(star_graph(3), 4) == IdealGin(8).embed(star_graph(3), 4), true);
  const auto pairs = counterexample_pairs();
  for (const auto& p : pairs) {
    IdealGin ideal(8);
    const bool distinct = !(ideal.embed(p.first, 8) == ideal.embed(p.second, 8));
    EXPECT_EQ(distinct, wl::wl_test(p.first, p.second, 8).distinguishes()) << p.name;
  }
  std::vector<Graph> pool;
  for (std::size_t n = 1; n <= 5; ++n)
    for (auto& g : enumerate_connected_graphs(n)) pool.push_back(std::move(g));
  IdealGin ideal(5);
  std::vector<IdealGin::Signature> sigs;
  for (const auto& g : pool) sigs.push_back(ideal.embed(g, 6));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 2000; ++t) {
    const auto i = uniform_index(rng, pool.size()), j = uniform_index(rng, pool.size());
    EXPECT_EQ(!(sigs[i] == sigs[j]), wl::wl_test(pool[i], pool[j], 6).distinguishes());
  }
  EXPECT_THROW(ideal.embed(cycle_graph(6), 2), PreconditionError);
  EXPECT_THROW(ideal.embed(cycle_graph(3).with_features(DenseFeatures{{1, 2, 3}, 1}), 2), PreconditionError);
}

TEST(Containment, GnnNeverSeparatesWlEquivalentGraphs) {
  std::vector<Graph> pool;
  for (std::size_t n = 1; n <= 5; ++n)
    for (auto& g : enumerate_connected_graphs(n)) pool.push_back(std::move(g));
  pool.push_back(cycle_graph(6));
  pool.push_back(disjoint_union(cycle_graph(3), cycle_graph(3)));
  for (const auto& c : all_presets()) {
    GnnModel m(c, 1, 2, 0);
    std::vector<Tensor> vecs;
    for (const auto& g : pool) vecs.push_back(m.graph_vectors(make_batch(g, 1)));
    for (std::size_t i = 0; i < pool.size(); i += 7) {
      for (std::size_t j = 0; j < pool.size(); ++j) {
        if (distance(vecs[i], vecs[j]) >= kEmbeddingTolerance) {
          EXPECT_TRUE(wl::wl_test(pool[i], pool[j], 8).distinguishes()) << c.name << " " << i << "," << j;
        }
      }
    }
    EXPECT_LT(distance(vecs[pool.size() - 1], vecs[pool.size() - 2]), kEmbeddingTolerance);
  }
}
