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

// 1-dimensional Weisfeiler-Lehman color refinement.
//
// Each round relabels node v with an exact compression of
//   (label(v), sorted multiset of neighbor labels)
// through a LabelDictionary. The dictionary is a map, not a hash, so distinct
// signatures can never collide. Sharing one dictionary between graphs makes
// their labels directly comparable.

#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/graph.hpp"
#include "json.hpp"

namespace ginlab::wl {

using Label = std::size_t;

struct Signature {
  Label previous = 0;
  std::vector<Label> neighbors;  // sorted

  auto operator<=>(const Signature&) const = default;
};

/// Injective signature -> label map, one namespace per iteration (k >= 1).
/// Fresh ids are handed out in first-encounter order, contiguous from 0.
class LabelDictionary {
 public:
  Label compress(std::size_t iteration, const Signature& sig) {
    if (iteration == 0) throw PreconditionError("iteration 0 labels are the input labels");
    auto& level = level_at(iteration);
    auto [it, inserted] = level.try_emplace(sig, level.size());
    return it->second;
  }

  std::size_t num_labels(std::size_t iteration) const {
    return iteration < levels_.size() ? levels_[iteration].size() : 0;
  }

  /// Highest iteration with at least one entry.
  std::size_t depth() const { return levels_.empty() ? 0 : levels_.size() - 1; }

  const std::map<Signature, Label>& level(std::size_t iteration) const {
    static const std::map<Signature, Label> empty;
    return iteration < levels_.size() ? levels_[iteration] : empty;
  }

  /// Folds `other` into this dictionary and returns, per iteration, the map
  /// from other's ids to ids in this dictionary. Iteration 0 (input labels)
  /// maps identically and its entry is left empty.
  /// Signatures are translated level by level, so the merged dictionary stays
  /// injective and agrees with what a single shared dictionary would produce
  /// up to renaming.
  std::vector<std::vector<Label>> merge(const LabelDictionary& other) {
    std::vector<std::vector<Label>> remap(std::max<std::size_t>(other.levels_.size(), 1));
    const auto translate = [&](std::size_t k, Label l) { return k == 0 ? l : remap[k].at(l); };
    for (std::size_t k = 1; k < other.levels_.size(); ++k) {
      // Ids are assigned in the order `other` first encountered them.
      std::vector<const Signature*> by_id(other.levels_[k].size());
      for (const auto& [sig, id] : other.levels_[k]) by_id[id] = &sig;
      remap[k].resize(by_id.size());
      for (Label id = 0; id < by_id.size(); ++id) {
        Signature translated{translate(k - 1, by_id[id]->previous), {}};
        translated.neighbors.reserve(by_id[id]->neighbors.size());
        for (Label l : by_id[id]->neighbors) translated.neighbors.push_back(translate(k - 1, l));
        std::sort(translated.neighbors.begin(), translated.neighbors.end());
        remap[k][id] = compress(k, translated);
      }
    }
    return remap;
  }

 private:
  std::map<Signature, Label>& level_at(std::size_t iteration) {
    if (levels_.size() <= iteration) levels_.resize(iteration + 1);
    return levels_[iteration];
  }

  std::vector<std::map<Signature, Label>> levels_;
};

/// labels[k][v] is the label of node v after k refinement rounds.
struct ColorAssignment {
  std::vector<std::vector<Label>> labels;
  /// First round whose partition equals that of the previous round; later
  /// rounds only rename classes. Equals iterations() + 1 if never reached.
  std::size_t stable_iteration = 0;

  std::size_t iterations() const { return labels.empty() ? 0 : labels.size() - 1; }
};

namespace detail {

inline std::size_t count_distinct(std::vector<Label> labels) {
  std::sort(labels.begin(), labels.end());
  return static_cast<std::size_t>(std::unique(labels.begin(), labels.end()) - labels.begin());
}

inline std::vector<Label> refine_once(const Graph& g, const std::vector<Label>& previous,
                                      std::size_t iteration, LabelDictionary& dict) {
  std::vector<Label> next(g.num_nodes());
  Signature sig;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    sig.previous = previous[v];
    sig.neighbors.clear();
    for (NodeId u : g.neighbors(v)) sig.neighbors.push_back(previous[u]);
    std::sort(sig.neighbors.begin(), sig.neighbors.end());
    next[v] = dict.compress(iteration, sig);
  }
  return next;
}

inline std::vector<Label> sorted(std::vector<Label> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace detail

/// Runs `iterations` refinement rounds through `dict`.
///
/// Every round is computed through the dictionary even after the partition
/// has stabilised, so the padded rounds carry the stable coloring under ids
/// that stay consistent with other graphs sharing the dictionary.
inline ColorAssignment wl_refine(const Graph& graph, std::size_t iterations, LabelDictionary& dict) {
  const auto& input = graph.categorical();
  ColorAssignment out;
  out.labels.reserve(iterations + 1);
  out.labels.push_back(input.labels);
  out.stable_iteration = iterations + 1;
  std::size_t classes = detail::count_distinct(input.labels);
  for (std::size_t k = 1; k <= iterations; ++k) {
    out.labels.push_back(detail::refine_once(graph, out.labels.back(), k, dict));
    const std::size_t now = detail::count_distinct(out.labels.back());
    if (now == classes && out.stable_iteration > iterations) out.stable_iteration = k;
    classes = now;
  }
  return out;
}

enum class Verdict { NonIsomorphic, PossiblyIsomorphic };

inline const char* to_string(Verdict v) {
  return v == Verdict::NonIsomorphic ? "NonIsomorphic" : "PossiblyIsomorphic";
}

struct TestResult {
  Verdict verdict = Verdict::PossiblyIsomorphic;
  /// Round at which the label histograms first differed (NonIsomorphic only).
  std::size_t iteration = 0;
  /// Rounds actually computed before a decision.
  std::size_t rounds = 0;

  bool distinguishes() const { return verdict == Verdict::NonIsomorphic; }
};

/// WL isomorphism test under a shared dictionary. Stops as soon as the
/// histograms differ, or once the joint partition of both graphs stops
/// refining (later rounds cannot separate anything new).
inline TestResult wl_test(const Graph& a, const Graph& b, std::size_t max_iter) {
  LabelDictionary dict;
  std::vector<Label> la = a.categorical().labels;
  std::vector<Label> lb = b.categorical().labels;
  const auto joint_classes = [](const std::vector<Label>& x, const std::vector<Label>& y) {
    std::vector<Label> all = x;
    all.insert(all.end(), y.begin(), y.end());
    return detail::count_distinct(std::move(all));
  };
  if (detail::sorted(la) != detail::sorted(lb)) return {Verdict::NonIsomorphic, 0, 0};
  std::size_t classes = joint_classes(la, lb);
  for (std::size_t k = 1; k <= max_iter; ++k) {
    la = detail::refine_once(a, la, k, dict);
    lb = detail::refine_once(b, lb, k, dict);
    if (detail::sorted(la) != detail::sorted(lb)) return {Verdict::NonIsomorphic, k, k};
    const std::size_t now = joint_classes(la, lb);
    if (now == classes) return {Verdict::PossiblyIsomorphic, 0, k};
    classes = now;
  }
  return {Verdict::PossiblyIsomorphic, 0, max_iter};
}

/// Sparse (iteration, label) -> count map; the explicit feature map of the
/// WL subtree kernel.
class FeatureVector {
 public:
  using Key = std::pair<std::size_t, Label>;

  void add(std::size_t iteration, Label label, std::size_t count = 1) { counts_[{iteration, label}] += count; }

  const std::map<Key, std::size_t>& counts() const { return counts_; }
  std::size_t count(std::size_t iteration, Label label) const {
    auto it = counts_.find({iteration, label});
    return it == counts_.end() ? 0 : it->second;
  }
  std::size_t num_entries() const { return counts_.size(); }

  double dot(const FeatureVector& other) const {
    double total = 0.0;
    auto a = counts_.begin();
    auto b = other.counts_.begin();
    while (a != counts_.end() && b != other.counts_.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        total += static_cast<double>(a->second) * static_cast<double>(b->second);
        ++a;
        ++b;
      }
    }
    return total;
  }

  /// {"(k,label)": count, ...} in key order.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [key, c] : counts_) {
      out["(" + std::to_string(key.first) + "," + std::to_string(key.second) + ")"] = c;
    }
    return out;
  }

  bool operator==(const FeatureVector&) const = default;

 private:
  std::map<Key, std::size_t> counts_;
};

/// Label counts of rounds 0..K inclusive.
inline FeatureVector wl_subtree_features(const Graph& graph, std::size_t K, LabelDictionary& dict) {
  const auto colors = wl_refine(graph, K, dict);
  FeatureVector f;
  for (std::size_t k = 0; k <= K; ++k) {
    for (Label l : colors.labels[k]) f.add(k, l);
  }
  return f;
}

inline std::vector<FeatureVector> wl_subtree_features(const Dataset& dataset, std::size_t K) {
  LabelDictionary dict;
  std::vector<FeatureVector> out;
  out.reserve(dataset.size());
  for (const auto& g : dataset.graphs()) out.push_back(wl_subtree_features(g, K, dict));
  return out;
}

/// Dense symmetric n x n matrix of kernel values.
struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }

  void write_csv(std::ostream& os) const {
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, (*this)(i, j));
        if (j) os << ',';
        os.write(buf, end - buf);
      }
      os << '\n';
    }
  }
};

inline KernelMatrix wl_kernel_matrix(const Dataset& dataset, std::size_t K) {
  const auto features = wl_subtree_features(dataset, K);
  KernelMatrix m{dataset.size(), std::vector<double>(dataset.size() * dataset.size())};
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = i; j < m.n; ++j) {
      const double v = features[i].dot(features[j]);
      m.values[i * m.n + j] = v;
      m.values[j * m.n + i] = v;
    }
  }
  return m;
}

}  // namespace ginlab::wl
