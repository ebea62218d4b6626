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

#include <set>
#include <sstream>

#include "ginlab/expressiveness.hpp"
#include "gtest/gtest.h"

using namespace ginlab;

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Reads base-N digits back out of a sum encoding. Digit z is the
// multiplicity of symbol z; the expansion is exact because every digit < N.
std::vector<std::size_t> decode_digits(Rational value, std::size_t base, std::size_t symbols) {
  std::vector<std::size_t> digits(symbols, 0);
  for (std::size_t z = 0; z < symbols; ++z) {
    const BigInt d = boost::multiprecision::numerator(value) / boost::multiprecision::denominator(value);
    digits[z] = static_cast<std::size_t>(d);
    value = (value - Rational(d)) * static_cast<long long>(base);
  }
  EXPECT_EQ(value, 0);
  return digits;
}

// Relative frequencies as exact fractions; the distribution of a multiset.
std::map<std::size_t, Rational> distribution(const Multiset<std::size_t>& m) {
  std::map<std::size_t, Rational> d;
  for (const auto& [x, k] : m) d[x] = Rational(static_cast<long long>(k), static_cast<long long>(m.size()));
  return d;
}

Multiset<Rational> rats(std::initializer_list<int> v) {
  Multiset<Rational> m;
  for (int x : v) m.insert(Rational(x));
  return m;
}

}  // namespace

TEST(Multisets, UniverseSizeMatchesStarsAndBars) {
  // sizes 0..S over m symbols: C(m + S, S)
  for (std::size_t m = 1; m <= 5; ++m) {
    for (std::size_t s = 0; s <= 4; ++s) {
      const auto u = all_multisets(m, s);
      EXPECT_EQ(u.size(), binomial(m + s, s)) << m << " " << s;
      EXPECT_EQ(std::set<Multiset<std::size_t>>(u.begin(), u.end()).size(), u.size());
    }
  }
  EXPECT_EQ(all_multisets(5, 4).size(), 126u);
}

TEST(SumEncoding, SmallValues) {
  const auto enc = index_encoder(5, 5);
  EXPECT_EQ(sum_encoding(Multiset<std::size_t>{}, enc), 0);
  EXPECT_EQ(sum_encoding(Multiset<std::size_t>{0, 0}, enc), 2);
  EXPECT_EQ(sum_encoding(Multiset<std::size_t>{1, 2}, enc), Rational(1, 5) + Rational(1, 25));
}

TEST(SumEncoding, InjectiveOverUniverseByDecoding) {
  const auto enc = index_encoder(5, 5);
  std::set<Rational> seen;
  for (const auto& m : all_multisets(5, 4)) {
    const Rational code = sum_encoding(m, enc);
    seen.insert(code);
    const auto digits = decode_digits(code, 5, 5);
    for (std::size_t z = 0; z < 5; ++z) EXPECT_EQ(digits[z], m.multiplicity(z));
  }
  EXPECT_EQ(seen.size(), 126u);
}

TEST(SumEncoding, RejectsOversizedMultisetAndForeignSymbol) {
  const auto enc = index_encoder(3, 3);
  EXPECT_THROW(sum_encoding(Multiset<std::size_t>{0, 1, 2}, enc), PreconditionError);
  EXPECT_THROW(sum_encoding(Multiset<std::size_t>{7}, enc), PreconditionError);
}

TEST(GinEncoding, ValuesAndSwap) {
  const auto enc = index_encoder(4, 5);
  const EpsilonNumber e = gin_encoding<std::size_t>(0, {}, enc);
  EXPECT_EQ(e.a, 1);
  EXPECT_EQ(e.b, 1);
  const EpsilonNumber s1 = gin_encoding<std::size_t>(0, {1}, enc);
  const EpsilonNumber s2 = gin_encoding<std::size_t>(1, {0}, enc);
  EXPECT_EQ(s1.a, Rational(6, 5));
  EXPECT_EQ(s2.a, Rational(6, 5));
  EXPECT_EQ(s1.b, 1);
  EXPECT_EQ(s2.b, Rational(1, 5));
  EXPECT_FALSE(s1 == s2);
}

TEST(GinEncoding, InjectiveOverCenterAndNeighborhood) {
  const auto enc = index_encoder(4, 5);
  std::set<EpsilonNumber> seen;
  std::size_t total = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    for (const auto& m : all_multisets(4, 3)) {
      const EpsilonNumber h = gin_encoding(c, m, enc);
      seen.insert(h);
      ++total;
      // b recovers the center, a - b the neighborhood
      EXPECT_EQ(h.b, enc(c));
      const auto digits = decode_digits(h.a - h.b, 5, 4);
      for (std::size_t z = 0; z < 4; ++z) EXPECT_EQ(digits[z], m.multiplicity(z));
    }
  }
  EXPECT_EQ(total, 4 * binomial(7, 3));
  EXPECT_EQ(seen.size(), total);
}

TEST(OneLayer, EqualSumsCollide) {
  double worst = 0.0, scale = 0.0;
  for (std::size_t dim = 1; dim <= 8; ++dim) {
    const auto r = one_layer_collision(rats({1, 1, 1, 1, 1}), rats({2, 3}), 100, dim, 7 + dim);
    EXPECT_EQ(r.trials, 100u);
    worst = std::max(worst, r.max_abs_diff);
    scale = std::max(scale, r.scale);
  }
  EXPECT_GT(scale, 0.0);
  EXPECT_LT(worst, 1e-9 * scale);
}

TEST(OneLayer, OtherEqualSumPairsCollide) {
  const std::vector<std::pair<Multiset<Rational>, Multiset<Rational>>> pairs{
      {rats({1, 3}), rats({2, 2})},
      {rats({4}), rats({1, 1, 2})},
      {{Rational(1, 2), Rational(1, 2)}, {Rational(1)}},
  };
  for (const auto& [a, b] : pairs) {
    const auto r = one_layer_collision(a, b, 50, 8, 3);
    EXPECT_LT(r.max_abs_diff, 1e-9 * r.scale);
  }
}

TEST(OneLayer, IdenticalIsExactlyZero) {
  EXPECT_EQ(one_layer_collision(rats({1}), rats({1}), 20, 4, 0).max_abs_diff, 0.0);
}

TEST(OneLayer, UnequalSumsSeparate) {
  const auto r = one_layer_collision(rats({1, 1}), rats({3}), 100, 8, 1);
  EXPECT_GT(r.max_abs_diff, 0.1);
}

TEST(OneLayer, BiasBreaksTheCollision) {
  const auto r = one_layer_collision(rats({1, 1, 1, 1, 1}), rats({2, 3}), 100, 8, 2, true);
  EXPECT_GT(r.max_abs_diff, 1e-3);
}

TEST(OneLayer, RejectsNonPositiveElements) {
  EXPECT_THROW(one_layer_collision(rats({0, 5}), rats({2, 3}), 1, 1, 0), PreconditionError);
  EXPECT_THROW(one_layer_collision(rats({5}), rats({-2, 7}), 1, 1, 0), PreconditionError);
}

TEST(MeanMax, PredicateExamples) {
  const Multiset<char> gr{'g', 'r'}, ggrr{'g', 'g', 'r', 'r'}, grr{'g', 'r', 'r'}, empty;
  EXPECT_TRUE(mean_distribution_equal(gr, ggrr));
  EXPECT_TRUE(max_set_equal(gr, ggrr));
  EXPECT_FALSE(mean_distribution_equal(gr, grr));
  EXPECT_TRUE(max_set_equal(gr, grr));
  EXPECT_TRUE(mean_distribution_equal(empty, empty));
  EXPECT_TRUE(max_set_equal(empty, empty));
  EXPECT_FALSE(mean_distribution_equal(empty, gr));
}

TEST(MeanMax, PredicatesAgreeWithOracles) {
  const auto u = all_multisets(4, 4);
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      const bool both_empty = u[i].empty() && u[j].empty();
      const bool dist = both_empty || (!u[i].empty() && !u[j].empty() && distribution(u[i]) == distribution(u[j]));
      EXPECT_EQ(mean_distribution_equal(u[i], u[j]), dist);
      EXPECT_EQ(max_set_equal(u[i], u[j]), u[i].underlying_set() == u[j].underlying_set());
    }
  }
}

TEST(MeanMax, EncodingsCollideExactlyOnPredicate) {
  const auto u = all_multisets(5, 4);
  const auto mean_enc = index_encoder(5, 5, 2);
  const auto max_enc = index_encoder(5, 5);
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      const bool mean_collide = mean_encoding(u[i], mean_enc) == mean_encoding(u[j], mean_enc);
      const bool max_collide = max_encoding(u[i], max_enc) == max_encoding(u[j], max_enc);
      ASSERT_EQ(mean_collide, distribution(u[i]) == distribution(u[j]) && !u[i].empty() && !u[j].empty())
          << u[i] << " " << u[j];
      ASSERT_EQ(max_collide, u[i].underlying_set() == u[j].underlying_set()) << u[i] << " " << u[j];
    }
  }
}

TEST(MeanMax, ScaleOneMeanIsNotEnough) {
  // (1 + 2/25) / 3 == (1 + 2/5 + 1/25) / 4 == 9/25
  const Multiset<std::size_t> x{0, 2, 2}, y{0, 1, 1, 2};
  EXPECT_FALSE(mean_distribution_equal(x, y));
  EXPECT_EQ(mean_encoding(x, index_encoder(3, 5, 1)), Rational(9, 25));
  EXPECT_EQ(mean_encoding(x, index_encoder(3, 5, 1)), mean_encoding(y, index_encoder(3, 5, 1)));
  EXPECT_NE(mean_encoding(x, index_encoder(3, 5, 2)), mean_encoding(y, index_encoder(3, 5, 2)));
}

TEST(Aggregators, FigureVerdicts) {
  const InjectiveEncoder<char> enc({'a', 'g', 'r'}, 5);
  const auto check = [&](const Multiset<char>& a, const Multiset<char>& b) {
    return aggregator_semantics_check(a, b, enc, 20, 11);
  };
  const auto a = check({'a', 'a'}, {'a', 'a', 'a'});
  EXPECT_TRUE(a.sum);
  EXPECT_FALSE(a.mean);
  EXPECT_FALSE(a.max);
  const auto b = check({'g', 'r'}, {'g', 'r', 'r'});
  EXPECT_TRUE(b.sum);
  EXPECT_TRUE(b.mean);
  EXPECT_FALSE(b.max);
  const auto c = check({'g', 'r'}, {'g', 'g', 'r', 'r'});
  EXPECT_TRUE(c.sum);
  EXPECT_FALSE(c.mean);
  EXPECT_FALSE(c.max);
  for (const auto& v : {a, b, c}) {
    EXPECT_EQ(v.float_disagreements, 0u);
    EXPECT_TRUE(v.ranking_holds());
  }
  for (const auto& p : figure_multiset_pairs()) EXPECT_EQ(check(p.first, p.second), p.expected) << p.name;
}

TEST(Aggregators, IdenticalMultisetsCollideEverywhere) {
  const auto enc = index_encoder(3, 5);
  const auto v = aggregator_semantics_check<std::size_t, std::less<std::size_t>>({0, 1, 1}, {1, 0, 1}, enc, 5, 0);
  EXPECT_FALSE(v.sum || v.mean || v.max);
  EXPECT_EQ(v.float_disagreements, 0u);
}

TEST(Aggregators, RankingOnRandomPairs) {
  const RankingSweep s = aggregator_ranking_sweep(10000, 5);
  EXPECT_EQ(s.pairs, 10000u);
  EXPECT_EQ(s.ranking_violations, 0u);
  EXPECT_EQ(s.float_disagreements, 0u);
  // both inclusions are strict on this sample
  EXPECT_GT(s.mean_only_collisions, 0u);
  EXPECT_GT(s.max_only_collisions, 0u);
  EXPECT_GE(s.sum_distinguished, s.mean_distinguished);
  EXPECT_GE(s.mean_distinguished, s.max_distinguished);
}

TEST(Lemmas, AllSuitesPass) {
  for (const auto& r : run_lemma_suites("all", 3)) EXPECT_TRUE(r.passed) << r.suite << " " << r.details.dump();
  EXPECT_THROW(run_lemma_suites("bogus"), PreconditionError);
  const auto sum = run_lemma_suites("sum");
  ASSERT_EQ(sum.size(), 1u);
  EXPECT_EQ(sum[0].details["multisets"], 126);
}

TEST(Atlas, ConnectedClassCounts) {
  // number of connected graphs on n unlabeled nodes: 1, 1, 2, 6, 21, 112
  const std::vector<std::size_t> expected{1, 1, 2, 6, 21, 112};
  const auto classes = connected_graph_classes(6);
  std::vector<std::size_t> by_n(7, 0);
  for (const auto& g : classes) ++by_n[g.num_nodes()];
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_EQ(by_n[n], expected[n - 1]) << n;
  EXPECT_EQ(exhaustive_atlas_pairs(4).pairs.size(), binomial(10, 2));
}

TEST(Atlas, NamedPairs) {
  AtlasInput in;
  add_counterexample_atlas_pairs(in);
  in.add_pair("same_c5", cycle_graph(5), cycle_graph(5));
  const auto report = distinguishability_atlas(in, default_atlas_configs(), {0, 1});
  EXPECT_TRUE(report.ok()) << report.violations.front();
  for (const auto& r : report.rows) {
    if (r.pair_name == "c6_vs_2c3") {
      EXPECT_FALSE(r.gnn_distinct) << r.config_name;
      EXPECT_FALSE(r.wl_distinct);
      EXPECT_TRUE(r.oracle_distinct);
    } else if (r.pair_name == "s3_vs_p4" && r.config_name == "gin-0") {
      EXPECT_TRUE(r.gnn_distinct);
      EXPECT_TRUE(r.wl_distinct);
    } else if (r.pair_name == "same_c5") {
      EXPECT_FALSE(r.gnn_distinct || r.wl_distinct || r.oracle_distinct);
      EXPECT_EQ(r.embedding_distance, 0.0);
    } else if (r.pair_name == "fig3a" && r.config_name != "mean-mlp" && r.config_name != "gcn" &&
               r.config_name != "max-mlp" && r.config_name != "graphsage") {
      EXPECT_TRUE(r.gnn_distinct) << r.config_name;
    }
  }
}

TEST(Atlas, SmallExhaustiveAndRandomHaveNoViolations) {
  AtlasInput in = exhaustive_atlas_pairs(5);
  add_random_atlas_pairs(in, 60, 7, 9);
  const auto report = distinguishability_atlas(in, default_atlas_configs(), {0, 1}, {0, 2});
  EXPECT_TRUE(report.ok()) << report.violations.size() << " violations, first: " << report.violations.front();
  EXPECT_EQ(report.rows.size(), in.pairs.size() * 8 * 2);
  std::size_t permuted = 0;
  for (const auto& r : report.rows) {
    if (!r.oracle_distinct) {
      ++permuted;
      EXPECT_FALSE(r.gnn_distinct);
    }
  }
  EXPECT_GT(permuted, 0u);
}

TEST(Atlas, CsvAndThreadIndependence) {
  AtlasInput in = exhaustive_atlas_pairs(4);
  const std::vector<AtlasConfig> configs{AtlasConfig::of(preset("gin-0")), AtlasConfig::ideal()};
  const auto one = distinguishability_atlas(in, configs, {3}, {0, 1});
  const auto two = distinguishability_atlas(in, configs, {3}, {0, 2});
  std::ostringstream a, b;
  one.write_csv(a);
  two.write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "pair_name,config_name,seed,gnn_distinct,wl_distinct,oracle_distinct,embedding_distance");
}

TEST(Atlas, OracleBound) {
  AtlasInput in;
  in.add_pair("big", cycle_graph(11), cycle_graph(11));
  EXPECT_THROW(distinguishability_atlas(in, {AtlasConfig::ideal()}, {0}), PreconditionError);
}
