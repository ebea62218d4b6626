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

// Central finite-difference oracle shared by the tensor, gnn and acceptance
// tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ginlab/tensor.hpp"

namespace ginlab::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t probes = 0;
  std::string worst;  // parameter[index] with the largest error
};

/// `loss_fn` builds the scalar loss on the given tape from the current
/// parameter values. Compares analytic gradients against
/// (L(w + h) - L(w - h)) / 2h at `probes` random coordinates.
inline GradCheckResult gradient_check(const std::vector<Parameter*>& params,
                                      const std::function<Var(Tape&)>& loss_fn, std::size_t probes,
                                      std::uint64_t seed, double h = 1e-5) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss_fn(tape));
  }
  const auto eval = [&] {
    Tape tape;
    return loss_fn(tape).value()(0, 0);
  };
  std::size_t total = 0;
  for (Parameter* p : params) total += p->value.size();
  std::mt19937_64 rng(seed);
  GradCheckResult out;
  for (std::size_t k = 0; k < probes; ++k) {
    std::size_t flat = uniform_index(rng, total);
    std::size_t which = 0;
    while (flat >= params[which]->value.size()) flat -= params[which++]->value.size();
    Parameter& p = *params[which];
    double& w = p.value.values()[flat];
    const double saved = w;
    w = saved + h;
    const double up = eval();
    w = saved - h;
    const double down = eval();
    w = saved;
    const double numeric = (up - down) / (2 * h);
    const double analytic = p.grad.values()[flat];
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
    const double err = std::abs(numeric - analytic) / denom;
    if (err > out.max_relative_error || out.worst.empty()) {
      out.max_relative_error = std::max(out.max_relative_error, err);
      out.worst = p.name + "[" + std::to_string(flat) + "]";
    }
    ++out.probes;
  }
  return out;
}

inline Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = (2.0 * uniform01(rng) - 1.0) * scale;
  return t;
}

// Segment i holds the rows in sets[i].
inline Segments make_segments(std::vector<std::vector<std::size_t>> sets) {
  Segments s;
  for (auto& set : sets) {
    s.index.insert(s.index.end(), set.begin(), set.end());
    s.offsets.push_back(s.index.size());
  }
  return s;
}

}  // namespace ginlab::testing
