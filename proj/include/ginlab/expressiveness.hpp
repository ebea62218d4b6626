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

// Checks on what sum, mean and max aggregation can tell apart, and the
// pairwise atlas comparing GNN embeddings against WL and the exact oracle.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ginlab/encoding.hpp"
#include "ginlab/error.hpp"
#include "ginlab/gnn.hpp"
#include "ginlab/isomorphism.hpp"
#include "ginlab/multiset.hpp"
#include "ginlab/parallel.hpp"
#include "ginlab/synth.hpp"
#include "ginlab/wl.hpp"

namespace ginlab {

// ---------------------------------------------------------------- multisets

/// Every multiset over symbols 0..alphabet_size-1 with at most max_size
/// elements, in lexicographic order of the multiplicity vector.
inline std::vector<Multiset<std::size_t>> all_multisets(std::size_t alphabet_size, std::size_t max_size) {
  std::vector<Multiset<std::size_t>> out;
  std::vector<std::size_t> counts(alphabet_size, 0);
  const auto rec = [&](auto&& self, std::size_t symbol, std::size_t remaining) -> void {
    if (symbol == alphabet_size) {
      Multiset<std::size_t> m;
      for (std::size_t s = 0; s < alphabet_size; ++s) m.insert(s, counts[s]);
      out.push_back(std::move(m));
      return;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[symbol] = c;
      self(self, symbol + 1, remaining - c);
    }
    counts[symbol] = 0;
  };
  rec(rec, 0, max_size);
  return out;
}

/// Same (S, m) up to a positive scale: equal supports and m1(x)|X2| = m2(x)|X1|.
template <class T, class C>
bool mean_distribution_equal(const Multiset<T, C>& x1, const Multiset<T, C>& x2) {
  if (x1.empty() || x2.empty()) return x1.empty() && x2.empty();
  if (x1.distinct_count() != x2.distinct_count()) return false;
  for (const auto& [item, m] : x1) {
    if (m * x2.size() != x2.multiplicity(item) * x1.size()) return false;
  }
  return true;
}

template <class T, class C>
bool max_set_equal(const Multiset<T, C>& x1, const Multiset<T, C>& x2) {
  return x1.underlying_set() == x2.underlying_set();
}

// -------------------------------------------------------- one-layer collision

struct OneLayerReport {
  std::size_t trials = 0;
  std::size_t dim = 0;
  double max_abs_diff = 0.0;
  /// Largest |sum ReLU(Wx)| entry seen over both multisets and all trials.
  double scale = 0.0;

  double relative() const { return scale > 0.0 ? max_abs_diff / scale : max_abs_diff; }

  nlohmann::ordered_json to_json() const {
    return {{"trials", trials}, {"dim", dim}, {"max_abs_diff", max_abs_diff}, {"scale", scale},
            {"relative", relative()}};
  }
};

/// Sums ReLU(W x) over both multisets for `trials` maps W: R -> R^dim with
/// entries uniform on [-1, 1]. The first two trials use an all-negative and an
/// all-positive W so both ReLU regimes are always covered. With `bias` each
/// map gets a random offset, which breaks the positive homogeneity.
inline OneLayerReport one_layer_collision(const Multiset<Rational>& x1, const Multiset<Rational>& x2,
                                          std::size_t trials, std::size_t dim, std::uint64_t seed,
                                          bool bias = false) {
  if (dim < 1) throw PreconditionError("collision check needs dim >= 1");
  for (const auto* x : {&x1, &x2}) {
    for (const auto& [v, m] : *x) {
      if (v <= 0) throw PreconditionError("one-layer collision needs positive elements, got " + v.str());
    }
  }
  std::mt19937_64 rng(seed);
  OneLayerReport r;
  r.trials = trials;
  r.dim = dim;
  std::vector<double> w(dim), b(dim, 0.0), s1(dim), s2(dim);
  const auto accumulate = [&](const Multiset<Rational>& x, std::vector<double>& s) {
    std::fill(s.begin(), s.end(), 0.0);
    for (const auto& [v, m] : x) {
      const double xv = static_cast<double>(v);
      for (std::size_t i = 0; i < dim; ++i) s[i] += static_cast<double>(m) * std::max(0.0, w[i] * xv + b[i]);
    }
  };
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double u = uniform01(rng);
      if (t == 0) w[i] = -(0.05 + 0.95 * u);
      else if (t == 1) w[i] = 0.05 + 0.95 * u;
      else w[i] = 2.0 * u - 1.0;
      if (bias) b[i] = 2.0 * uniform01(rng) - 1.0;
    }
    accumulate(x1, s1);
    accumulate(x2, s2);
    for (std::size_t i = 0; i < dim; ++i) {
      r.max_abs_diff = std::max(r.max_abs_diff, std::abs(s1[i] - s2[i]));
      r.scale = std::max({r.scale, std::abs(s1[i]), std::abs(s2[i])});
    }
  }
  return r;
}

// ----------------------------------------------------- aggregator semantics

struct AggregatorVerdicts {
  bool sum = false;  // true: the aggregator distinguishes the pair
  bool mean = false;
  bool max = false;
  /// Float trials whose verdict disagreed with the exact one.
  std::size_t float_disagreements = 0;
  /// Float max collisions the one-hot construction separates; not an error.
  std::size_t float_max_dominated = 0;

  /// sum distinguishes ⊇ mean distinguishes ⊇ max distinguishes.
  bool ranking_holds() const { return (!max || mean) && (!mean || sum); }
  bool operator==(const AggregatorVerdicts& o) const {
    return sum == o.sum && mean == o.mean && max == o.max;
  }

  nlohmann::ordered_json to_json() const {
    return {{"sum", sum},
            {"mean", mean},
            {"max", max},
            {"float_disagreements", float_disagreements},
            {"float_max_dominated", float_max_dominated}};
  }
};

/// Exact verdicts for sum, mean and max aggregation of f over X1 vs X2.
/// `enc` supplies the alphabet and base; mean uses the same alphabet with
/// N^(-2Z) so that it is injective on distributions (needs |X1||X2| < N^2),
/// max uses one-hot vectors. Each float trial embeds the alphabet as random
/// 4-vectors and checks that float aggregation collides wherever the exact
/// verdict collides, and that float sum and mean separate wherever the exact
/// ones do.
template <class T, class C>
AggregatorVerdicts aggregator_semantics_check(const Multiset<T, C>& x1, const Multiset<T, C>& x2,
                                              const InjectiveEncoder<T, C>& enc, std::size_t trials,
                                              std::uint64_t seed) {
  const InjectiveEncoder<T, C> mean_enc(enc.alphabet(), enc.base(), 2 * enc.exponent_scale());
  AggregatorVerdicts v;
  v.sum = sum_encoding(x1, enc) != sum_encoding(x2, enc);
  v.mean = mean_encoding(x1, mean_enc) != mean_encoding(x2, mean_enc);
  v.max = max_encoding(x1, enc) != max_encoding(x2, enc);

  constexpr std::size_t kDim = 4;
  std::mt19937_64 rng(seed);
  std::vector<double> emb(enc.alphabet_size() * kDim);
  const auto aggregate = [&](const Multiset<T, C>& x, int kind) {
    std::vector<double> out(kDim, kind == 2 && !x.empty() ? -INFINITY : 0.0);
    for (const auto& [item, m] : x) {
      const double* e = &emb[enc.index(item) * kDim];
      for (std::size_t d = 0; d < kDim; ++d) {
        if (kind == 2) out[d] = std::max(out[d], e[d]);
        else out[d] += static_cast<double>(m) * e[d];
      }
    }
    if (kind == 1 && !x.empty()) {
      for (double& o : out) o /= static_cast<double>(x.size());
    }
    return out;
  };
  for (std::size_t t = 0; t < trials; ++t) {
    for (double& e : emb) e = 2.0 * uniform01(rng) - 1.0;
    const bool exact[3] = {v.sum, v.mean, v.max};
    for (int kind = 0; kind < 3; ++kind) {
      const bool separated = euclidean_distance(aggregate(x1, kind), aggregate(x2, kind)) >= kEmbeddingTolerance;
      if (separated == exact[kind]) continue;
      // a random real embedding can hide a symbol under the max of the others
      if (kind == 2 && !separated) ++v.float_max_dominated;
      else ++v.float_disagreements;
    }
  }
  return v;
}

/// The multiset pairs behind the three failure cases for mean and max:
/// a: {a, a} vs {a, a, a}; b: {g, r} vs {g, r, r}; c: {g, r} vs {g, g, r, r}.
struct NamedMultisetPair {
  std::string name;
  Multiset<char> first;
  Multiset<char> second;
  AggregatorVerdicts expected;
};

inline std::vector<NamedMultisetPair> figure_multiset_pairs() {
  return {
      {"fig3a", {'a', 'a'}, {'a', 'a', 'a'}, {true, false, false, 0}},
      {"fig3b", {'g', 'r'}, {'g', 'r', 'r'}, {true, true, false, 0}},
      {"fig3c", {'g', 'r'}, {'g', 'g', 'r', 'r'}, {true, false, false, 0}},
  };
}

struct RankingSweep {
  std::size_t pairs = 0;
  std::size_t ranking_violations = 0;
  std::size_t float_disagreements = 0;
  std::size_t float_max_dominated = 0;
  std::size_t sum_distinguished = 0;
  std::size_t mean_distinguished = 0;
  std::size_t max_distinguished = 0;
  /// Pairs where mean collides but the multisets differ, and where max
  /// collides but mean does not: the strict parts of the ranking.
  std::size_t mean_only_collisions = 0;
  std::size_t max_only_collisions = 0;

  nlohmann::ordered_json to_json() const {
    return {{"pairs", pairs},
            {"ranking_violations", ranking_violations},
            {"float_disagreements", float_disagreements},
            {"float_max_dominated", float_max_dominated},
            {"sum_distinguished", sum_distinguished},
            {"mean_distinguished", mean_distinguished},
            {"max_distinguished", max_distinguished},
            {"strict_sum_over_mean", mean_only_collisions},
            {"strict_mean_over_max", max_only_collisions}};
  }
};

/// Random multiset pairs over a 4-symbol alphabet with sizes up to 6. A
/// quarter of the pairs are scaled copies and a quarter share the support,
/// so both strict parts of the ranking are exercised.
inline RankingSweep aggregator_ranking_sweep(std::size_t pairs, std::uint64_t seed,
                                             std::size_t float_trials = 1) {
  constexpr std::size_t kAlphabet = 4, kMaxSize = 6;
  const auto enc = index_encoder(kAlphabet, kMaxSize + 1);
  std::mt19937_64 rng(seed);
  const auto random_multiset = [&](std::size_t size) {
    Multiset<std::size_t> m;
    for (std::size_t i = 0; i < size; ++i) m.insert(uniform_index(rng, kAlphabet));
    return m;
  };
  RankingSweep s;
  for (std::size_t p = 0; p < pairs; ++p) {
    Multiset<std::size_t> a, b;
    switch (p % 4) {
      case 0:
      case 1:
        a = random_multiset(uniform_index(rng, kMaxSize + 1));
        b = random_multiset(uniform_index(rng, kMaxSize + 1));
        break;
      case 2: {  // b = k copies of a
        a = random_multiset(1 + uniform_index(rng, 3));
        const std::size_t k = 1 + uniform_index(rng, kMaxSize / a.size());
        for (const auto& [x, m] : a) b.insert(x, k * m);
        break;
      }
      default: {  // same support, random multiplicities
        a = random_multiset(1 + uniform_index(rng, 3));
        for (const auto& [x, m] : a) b.insert(x, 1 + uniform_index(rng, kMaxSize / a.distinct_count()));
        break;
      }
    }
    const AggregatorVerdicts v = aggregator_semantics_check(a, b, enc, float_trials, seed + p);
    ++s.pairs;
    if (!v.ranking_holds()) ++s.ranking_violations;
    s.float_disagreements += v.float_disagreements;
    s.float_max_dominated += v.float_max_dominated;
    s.sum_distinguished += v.sum;
    s.mean_distinguished += v.mean;
    s.max_distinguished += v.max;
    s.mean_only_collisions += v.sum && !v.mean;
    s.max_only_collisions += v.mean && !v.max;
  }
  return s;
}

// ----------------------------------------------------------------- lemmas

struct LemmaResult {
  std::string suite;
  bool passed = false;
  nlohmann::ordered_json details;
};

namespace detail {

template <class V>
std::size_t count_distinct_values(std::vector<V> values) {
  std::sort(values.begin(), values.end());
  return static_cast<std::size_t>(std::unique(values.begin(), values.end()) - values.begin());
}

inline LemmaResult sum_suite() {
  const auto universe = all_multisets(5, 4);
  const auto enc = index_encoder(5, 5);
  std::vector<Rational> codes;
  for (const auto& m : universe) codes.push_back(sum_encoding(m, enc));
  const std::size_t distinct = count_distinct_values(codes);
  return {"sum",
          distinct == universe.size(),
          {{"alphabet", 5}, {"max_size", 4}, {"base", 5}, {"multisets", universe.size()}, {"distinct", distinct}}};
}

inline LemmaResult gin_suite() {
  const auto universe = all_multisets(4, 3);
  const auto enc = index_encoder(4, 5);
  std::vector<EpsilonNumber> codes;
  for (std::size_t c = 0; c < 4; ++c) {
    for (const auto& m : universe) codes.push_back(gin_encoding(c, m, enc));
  }
  const std::size_t distinct = count_distinct_values(codes);
  // center and neighbor swapped: same a, different b
  const EpsilonNumber swap1 = gin_encoding<std::size_t>(0, {1}, enc);
  const EpsilonNumber swap2 = gin_encoding<std::size_t>(1, {0}, enc);
  const bool swap_ok = swap1.a == swap2.a && swap1.b != swap2.b;
  return {"gin",
          distinct == codes.size() && swap_ok,
          {{"alphabet", 4},
           {"max_size", 3},
           {"base", 5},
           {"pairs", codes.size()},
           {"distinct", distinct},
           {"swap_separated", swap_ok}}};
}

inline Multiset<Rational> rationals(std::initializer_list<int> values) {
  Multiset<Rational> m;
  for (int v : values) m.insert(Rational(v));
  return m;
}

inline LemmaResult onelayer_suite(std::uint64_t seed) {
  const auto x1 = rationals({1, 1, 1, 1, 1});
  const auto x2 = rationals({2, 3});
  double worst_relative = 0.0, worst_abs = 0.0, scale = 0.0;
  nlohmann::ordered_json per_dim = nlohmann::ordered_json::array();
  for (std::size_t dim = 1; dim <= 8; ++dim) {
    const OneLayerReport r = one_layer_collision(x1, x2, 100, dim, seed + dim);
    worst_relative = std::max(worst_relative, r.relative());
    worst_abs = std::max(worst_abs, r.max_abs_diff);
    scale = std::max(scale, r.scale);
    per_dim.push_back(r.to_json());
  }
  // control: unequal sums must separate
  const OneLayerReport control = one_layer_collision(rationals({1, 1}), rationals({3}), 100, 8, seed);
  const OneLayerReport biased = one_layer_collision(x1, x2, 100, 8, seed, true);
  const bool ok = worst_abs < 1e-9 * scale && control.max_abs_diff > 0.0;
  return {"onelayer",
          ok,
          {{"x1", "{1,1,1,1,1}"},
           {"x2", "{2,3}"},
           {"max_abs_diff", worst_abs},
           {"scale", scale},
           {"max_relative_diff", worst_relative},
           {"per_dim", per_dim},
           {"control_unequal_sums", control.to_json()},
           {"with_bias", biased.to_json()}}};
}

inline LemmaResult mean_max_suite(bool mean) {
  const auto universe = all_multisets(5, 4);
  const auto enc = index_encoder(5, 5, mean ? 2 : 1);
  std::size_t pairs = 0, mismatches = 0, collisions = 0;
  std::vector<Rational> means;
  std::vector<std::vector<int>> maxes;
  for (const auto& m : universe) {
    if (mean) means.push_back(mean_encoding(m, enc));
    else maxes.push_back(max_encoding(m, enc));
  }
  for (std::size_t i = 0; i < universe.size(); ++i) {
    for (std::size_t j = i + 1; j < universe.size(); ++j) {
      const bool collide = mean ? means[i] == means[j] : maxes[i] == maxes[j];
      const bool predicted = mean ? mean_distribution_equal(universe[i], universe[j])
                                  : max_set_equal(universe[i], universe[j]);
      ++pairs;
      collisions += collide;
      mismatches += collide != predicted;
    }
  }
  nlohmann::ordered_json figures = nlohmann::ordered_json::array();
  bool figures_ok = true;
  const InjectiveEncoder<char> fig_enc({'a', 'g', 'r'}, 5);
  for (const auto& p : figure_multiset_pairs()) {
    const auto v = aggregator_semantics_check(p.first, p.second, fig_enc, 0, 0);
    const bool got = mean ? v.mean : v.max;
    const bool want = mean ? p.expected.mean : p.expected.max;
    figures_ok = figures_ok && got == want;
    figures.push_back({{"pair", p.name}, {"distinguishes", got}});
  }
  return {mean ? "mean" : "max",
          mismatches == 0 && figures_ok,
          {{"alphabet", 5},
           {"max_size", 4},
           {"pairs", pairs},
           {"collisions", collisions},
           {"mismatches", mismatches},
           {"figures", figures}}};
}

inline LemmaResult ranking_suite(std::uint64_t seed) {
  const InjectiveEncoder<char> enc({'a', 'g', 'r'}, 5);
  nlohmann::ordered_json figures = nlohmann::ordered_json::array();
  bool ok = true;
  for (const auto& p : figure_multiset_pairs()) {
    const auto v = aggregator_semantics_check(p.first, p.second, enc, 10, seed);
    const bool match = v == p.expected && v.float_disagreements == 0;
    ok = ok && match;
    auto j = v.to_json();
    j["pair"] = p.name;
    j["matches_expected"] = match;
    figures.push_back(j);
  }
  const RankingSweep sweep = aggregator_ranking_sweep(10000, seed);
  ok = ok && sweep.ranking_violations == 0 && sweep.float_disagreements == 0;
  return {"ranking", ok, {{"figures", figures}, {"random", sweep.to_json()}}};
}

}  // namespace detail

inline const std::vector<std::string>& lemma_suite_names() {
  static const std::vector<std::string> names{"sum", "gin", "onelayer", "mean", "max", "ranking"};
  return names;
}

/// Runs one named suite, or every suite for "all".
inline std::vector<LemmaResult> run_lemma_suites(const std::string& suite, std::uint64_t seed = 0) {
  std::vector<LemmaResult> out;
  const auto run = [&](const std::string& name) {
    if (name == "sum") out.push_back(detail::sum_suite());
    else if (name == "gin") out.push_back(detail::gin_suite());
    else if (name == "onelayer") out.push_back(detail::onelayer_suite(seed));
    else if (name == "mean") out.push_back(detail::mean_max_suite(true));
    else if (name == "max") out.push_back(detail::mean_max_suite(false));
    else if (name == "ranking") out.push_back(detail::ranking_suite(seed));
  };
  if (suite == "all") {
    for (const auto& n : lemma_suite_names()) run(n);
  } else if (std::find(lemma_suite_names().begin(), lemma_suite_names().end(), suite) !=
             lemma_suite_names().end()) {
    run(suite);
  } else {
    throw PreconditionError("unknown lemma suite '" + suite + "' (valid: all, sum, gin, onelayer, mean, max, ranking)");
  }
  return out;
}

// ------------------------------------------------------------------ atlas

struct AtlasPair {
  std::string name;
  std::size_t first = 0;  // indices into AtlasInput::graphs
  std::size_t second = 0;
};

struct AtlasInput {
  std::vector<Graph> graphs;
  std::vector<AtlasPair> pairs;

  std::size_t add_graph(Graph g) {
    graphs.push_back(std::move(g));
    return graphs.size() - 1;
  }
  void add_pair(std::string name, Graph a, Graph b) {
    const std::size_t i = add_graph(std::move(a));
    const std::size_t j = add_graph(std::move(b));
    pairs.push_back({std::move(name), i, j});
  }
  std::size_t max_nodes() const {
    std::size_t n = 0;
    for (const auto& g : graphs) n = std::max(n, g.num_nodes());
    return n;
  }
};

/// Connected graphs on 1..max_nodes nodes, one per isomorphism class.
/// Candidates are bucketed by (n, sorted degree sequence) before the oracle
/// is consulted.
inline std::vector<Graph> connected_graph_classes(std::size_t max_nodes) {
  std::vector<Graph> out;
  for (std::size_t n = 1; n <= max_nodes; ++n) {
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> buckets;
    for_each_connected_graph(n, [&](const Graph& g) {
      std::vector<std::size_t> key(n);
      for (NodeId v = 0; v < n; ++v) key[v] = g.degree(v);
      std::sort(key.begin(), key.end());
      auto& bucket = buckets[key];
      for (std::size_t idx : bucket) {
        if (brute_force_isomorphic(out[idx], g)) return;
      }
      bucket.push_back(out.size());
      out.push_back(g);
    });
  }
  return out;
}

/// Every unordered pair of distinct isomorphism classes among connected
/// graphs with at most max_nodes nodes, named "c<i>_vs_c<j>".
inline AtlasInput exhaustive_atlas_pairs(std::size_t max_nodes) {
  AtlasInput in;
  in.graphs = connected_graph_classes(max_nodes);
  for (std::size_t i = 0; i < in.graphs.size(); ++i) {
    for (std::size_t j = i + 1; j < in.graphs.size(); ++j) {
      in.pairs.push_back({"c" + std::to_string(i) + "_vs_c" + std::to_string(j), i, j});
    }
  }
  return in;
}

/// `count` random same-size pairs with n = 2 + i % (max_nodes - 1). Every
/// fifth pair is a graph against a relabeled copy of itself.
inline void add_random_atlas_pairs(AtlasInput& in, std::size_t count, std::size_t max_nodes, std::uint64_t seed) {
  if (max_nodes < 2) throw PreconditionError("random atlas pairs need max_nodes >= 2");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = 2 + i % (max_nodes - 1);
    const double p = 0.2 + 0.6 * uniform01(rng);
    Graph a = random_graph(n, p, rng());
    Graph b;
    if (i % 5 == 4) {
      std::vector<NodeId> perm(n);
      for (NodeId v = 0; v < n; ++v) perm[v] = v;
      portable_shuffle(perm, rng);
      b = a.permuted(perm);
    } else {
      b = random_graph(n, p, rng());
    }
    in.add_pair("r" + std::to_string(i) + "_n" + std::to_string(n), std::move(a), std::move(b));
  }
}

inline void add_counterexample_atlas_pairs(AtlasInput& in) {
  for (auto& p : counterexample_pairs()) in.add_pair(p.name, std::move(p.first), std::move(p.second));
}

/// A GNN configuration, or the exact GIN when `gnn` is empty.
struct AtlasConfig {
  std::string name;
  std::optional<GnnConfig> gnn;

  static AtlasConfig ideal() { return {"ideal_gin", std::nullopt}; }
  static AtlasConfig of(const GnnConfig& c) { return {c.name, c}; }
  bool is_ideal() const { return !gnn.has_value(); }
};

struct AtlasRow {
  std::string pair_name;
  std::string config_name;
  std::uint64_t seed = 0;
  bool gnn_distinct = false;
  bool wl_distinct = false;
  bool oracle_distinct = false;
  /// Euclidean distance of graph vectors; for ideal_gin, the number of
  /// layers whose exact readouts differ.
  double embedding_distance = 0.0;
};

struct AtlasOptions {
  /// WL rounds and ideal GIN depth; 0 means the largest graph's node count.
  std::size_t rounds = 0;
  std::size_t threads = 1;
  double tolerance = kEmbeddingTolerance;
};

struct AtlasReport {
  std::vector<AtlasRow> rows;  // ordered by (pair, config, seed)
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }

  static void write_csv_header(std::ostream& os) {
    os << "pair_name,config_name,seed,gnn_distinct,wl_distinct,oracle_distinct,embedding_distance\n";
  }
  void write_csv(std::ostream& os) const {
    write_csv_header(os);
    char buf[64];
    for (const auto& r : rows) {
      const auto res = std::to_chars(buf, buf + sizeof buf, r.embedding_distance);
      os << r.pair_name << ',' << r.config_name << ',' << r.seed << ',' << r.gnn_distinct << ','
         << r.wl_distinct << ',' << r.oracle_distinct << ',' << std::string_view(buf, res.ptr - buf) << '\n';
    }
  }

  /// Counts of (distinguished pairs) per config over all seeds.
  nlohmann::ordered_json summary() const {
    std::map<std::string, std::array<std::size_t, 4>> by_config;  // cells, gnn, wl, oracle
    std::vector<std::string> order;
    for (const auto& r : rows) {
      if (!by_config.count(r.config_name)) order.push_back(r.config_name);
      auto& c = by_config[r.config_name];
      ++c[0];
      c[1] += r.gnn_distinct;
      c[2] += r.wl_distinct;
      c[3] += r.oracle_distinct;
    }
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& name : order) {
      const auto& c = by_config[name];
      j.push_back({{"config", name}, {"cells", c[0]}, {"gnn_distinct", c[1]}, {"wl_distinct", c[2]},
                   {"oracle_distinct", c[3]}});
    }
    return j;
  }
};

/// Evaluates every (pair, config, seed) cell and checks
/// gnn ⊆ wl ⊆ oracle, with gnn == wl for ideal_gin. GNN configs run in eval
/// mode from a fresh initialization per seed; all graphs of a cell share one
/// batch.
inline AtlasReport distinguishability_atlas(const AtlasInput& in, const std::vector<AtlasConfig>& configs,
                                            const std::vector<std::uint64_t>& seeds,
                                            const AtlasOptions& options = {}) {
  const std::size_t max_nodes = in.max_nodes();
  if (max_nodes > kMaxOracleNodes) {
    throw PreconditionError("atlas graphs exceed the oracle bound of " + std::to_string(kMaxOracleNodes) + " nodes");
  }
  const std::size_t rounds = options.rounds ? options.rounds : std::max<std::size_t>(max_nodes, 1);
  const std::size_t input_dim = [&] {
    std::size_t d = 1;
    for (const auto& g : in.graphs) d = std::max(d, feature_dimension(g));
    return d;
  }();

  // pair-level verdicts, shared by all cells
  std::vector<char> wl(in.pairs.size()), oracle(in.pairs.size());
  parallel_for(in.pairs.size(), options.threads, [&](std::size_t p) {
    const Graph& a = in.graphs[in.pairs[p].first];
    const Graph& b = in.graphs[in.pairs[p].second];
    wl[p] = wl::wl_test(a, b, rounds).distinguishes();
    oracle[p] = !brute_force_isomorphic(a, b);
  });

  // one embedding table per (config, seed) cell
  const std::size_t cells = configs.size() * seeds.size();
  std::vector<Tensor> vectors(cells);
  std::vector<IdealGin::Signature> ideal;
  bool any_ideal = false;
  for (const auto& c : configs) any_ideal = any_ideal || c.is_ideal();
  if (any_ideal) {
    IdealGin gin(max_nodes);
    for (const auto& g : in.graphs) ideal.push_back(gin.embed(g, rounds));
  }
  std::vector<const Graph*> all;
  for (const auto& g : in.graphs) all.push_back(&g);
  const GraphBatch batch = make_batch(all, input_dim);
  parallel_for(cells, options.threads, [&](std::size_t cell) {
    const AtlasConfig& c = configs[cell / seeds.size()];
    if (c.is_ideal()) return;
    GnnModel model(*c.gnn, input_dim, 2, seeds[cell % seeds.size()]);
    vectors[cell] = model.graph_vectors(batch);
  });

  AtlasReport report;
  report.rows.reserve(in.pairs.size() * cells);
  for (std::size_t p = 0; p < in.pairs.size(); ++p) {
    const AtlasPair& pair = in.pairs[p];
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const AtlasConfig& c = configs[cell / seeds.size()];
      AtlasRow row{pair.name, c.name, seeds[cell % seeds.size()], false, wl[p] != 0, oracle[p] != 0, 0.0};
      if (c.is_ideal()) {
        const auto& la = ideal[pair.first].layers;
        const auto& lb = ideal[pair.second].layers;
        std::size_t differing = 0;
        for (std::size_t k = 0; k < la.size(); ++k) differing += la[k] != lb[k];
        row.embedding_distance = static_cast<double>(differing);
        row.gnn_distinct = differing != 0;
      } else {
        row.embedding_distance =
            euclidean_distance(vectors[cell].row(pair.first), vectors[cell].row(pair.second));
        row.gnn_distinct = row.embedding_distance >= options.tolerance;
      }
      const std::string where = pair.name + " / " + c.name + " / seed " + std::to_string(row.seed);
      if (row.gnn_distinct && !row.wl_distinct) report.violations.push_back(where + ": GNN separates a WL-equivalent pair");
      if (row.wl_distinct && !row.oracle_distinct) report.violations.push_back(where + ": WL separates isomorphic graphs");
      if (c.is_ideal() && row.gnn_distinct != row.wl_distinct) {
        report.violations.push_back(where + ": ideal GIN disagrees with WL");
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

/// The seven presets followed by ideal_gin.
inline std::vector<AtlasConfig> default_atlas_configs() {
  std::vector<AtlasConfig> out;
  for (const auto& n : preset_names()) out.push_back(AtlasConfig::of(preset(n)));
  out.push_back(AtlasConfig::ideal());
  return out;
}

}  // namespace ginlab
