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

#pragma once

#include <algorithm>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/graph.hpp"

namespace ginlab {

inline constexpr std::size_t kDefaultDegreeCap = 64;

/// Replaces node features with Categorical(min(degree, cap)), vocabulary cap + 1.
inline Graph degree_onehot_features(const Graph& g, std::size_t cap = kDefaultDegreeCap) {
  if (cap < 1) throw PreconditionError("degree cap must be >= 1");
  CategoricalFeatures f{std::vector<std::size_t>(g.num_nodes()), cap + 1};
  for (NodeId v = 0; v < g.num_nodes(); ++v) f.labels[v] = std::min(g.degree(v), cap);
  return g.with_features(std::move(f));
}

inline Dataset degree_onehot_features(const Dataset& d, std::size_t cap = kDefaultDegreeCap) {
  std::vector<Graph> out;
  out.reserve(d.size());
  for (const auto& g : d.graphs()) out.push_back(degree_onehot_features(g, cap));
  return Dataset(std::move(out), d.num_classes(), d.name());
}

/// Every node gets label 0 with vocabulary size 1.
inline Graph uniform_features(const Graph& g) { return g.with_features(uniform_labels(g.num_nodes())); }

inline Dataset uniform_features(const Dataset& d) {
  std::vector<Graph> out;
  out.reserve(d.size());
  for (const auto& g : d.graphs()) out.push_back(uniform_features(g));
  return Dataset(std::move(out), d.num_classes(), d.name());
}

}  // namespace ginlab
