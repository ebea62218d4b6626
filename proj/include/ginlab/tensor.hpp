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

// Small dense reverse-mode autodiff engine.
//
// Every value is a row-major rows x cols matrix of doubles. A Tape records
// operations in execution order, so a reverse sweep over the node list is a
// valid topological order. Parameters live outside the tape and receive
// accumulated gradients when backward() reaches their leaf.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/synth.hpp"
#include "json.hpp"

namespace ginlab {

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
      throw DimensionError("tensor " + shape_string() + " given " + std::to_string(values_.size()) +
                           " values");
    }
  }

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> values;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged rows in tensor literal");
      values.insert(values.end(), row.begin(), row.end());
    }
    return Tensor(r, c, std::move(values));
  }

  static Tensor identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  std::string shape_string() const { return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]"; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool operator==(const Tensor&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

/// Uniform on [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (double& v : t.values()) v = (2.0 * uniform01(rng) - 1.0) * a;
  return t;
}

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value) { return push(std::move(value), false, nullptr, {}); }
  Var parameter(Parameter& p) { return push(p.value, true, &p, {}); }

  /// Records a derived value; it needs a gradient iff any input does.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward) {
    bool needs = false;
    for (Var v : inputs) needs = needs || nodes_.at(v.id).needs_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(backward) : Backward{});
  }
  Var record(Tensor value, std::span<const Var> inputs, Backward backward) {
    bool needs = false;
    for (Var v : inputs) needs = needs || nodes_.at(v.id).needs_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(backward) : Backward{});
  }

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient buffer of `v`, zero-initialized on first use.
  Tensor& grad(Var v) {
    auto& n = nodes_.at(v.id);
    if (n.grad.size() != n.value.size() || !n.has_grad) {
      n.grad = Tensor(n.value.rows(), n.value.cols());
      n.has_grad = true;
    }
    return n.grad;
  }

  /// Reverse sweep from a 1x1 loss. Parameter leaves add their gradient into
  /// Parameter::grad.
  void backward(Var loss) {
    if (loss.tape != this) throw PreconditionError("loss is not recorded on this tape");
    const Tensor& l = value(loss);
    if (l.rows() != 1 || l.cols() != 1) {
      throw DimensionError("backward needs a scalar loss, got " + l.shape_string());
    }
    grad(loss)(0, 0) += 1.0;
    for (std::size_t id = loss.id + 1; id-- > 0;) {
      auto& n = nodes_[id];
      if (!n.has_grad || !n.needs_grad) continue;
      // Rules only touch earlier nodes, so n.grad stays put while they run.
      if (n.backward) n.backward(*this, n.grad);
      if (n.param) {
        auto& pg = n.param->grad;
        if (!pg.same_shape(n.value)) pg = Tensor(n.value.rows(), n.value.cols());
        for (std::size_t k = 0; k < pg.size(); ++k) pg.values()[k] += n.grad.values()[k];
      }
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool needs_grad = false;
    Parameter* param = nullptr;
    Backward backward;
  };

  Var push(Tensor value, bool needs, Parameter* p, Backward backward) {
    nodes_.push_back(Node{std::move(value), Tensor(), false, needs, p, std::move(backward)});
    return Var{this, nodes_.size() - 1};
  }

  std::deque<Node> nodes_;  // deque: references to values survive push_back
};

inline const Tensor& Var::value() const { return tape->value(*this); }

namespace detail {

inline void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw PreconditionError("operands belong to different tapes");
}

inline void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

inline void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst.values()[k] += src.values()[k];
}

}  // namespace detail

/// Index sets over the rows of a matrix: segment s covers
/// index[offsets[s] .. offsets[s+1]). Must outlive any backward pass that
/// uses it.
struct Segments {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> index;

  std::size_t count() const { return offsets.size() - 1; }
  std::size_t size(std::size_t s) const { return offsets[s + 1] - offsets[s]; }
};

// Plain (untaped) kernels, shared by the taped ops and by callers that only
// need forward values.

/// c += a * b
inline void gemm_accumulate(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    const double* ai = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double v = ai[p];
      if (v == 0.0) continue;
      const double* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * bp[j];
    }
  }
}

/// c += a^T * b
inline void gemm_at_b_accumulate(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.data() + i * k;
    const double* bi = b.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double v = ai[p];
      if (v == 0.0) continue;
      double* cp = c.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += v * bi[j];
    }
  }
}

/// c += a * b^T. b is transposed once so the inner loop is an axpy.
inline void gemm_a_bt_accumulate(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = b.rows(), k = b.cols();
  Tensor bt(k, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) bt.data()[p * n + j] = b.data()[j * k + p];
  }
  gemm_accumulate(a, bt, c);
}

inline Var matmul(Var a, Var b) {
  detail::require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: shape mismatch " + av.shape_string() + " x " + bv.shape_string());
  }
  Tensor out(av.rows(), bv.cols());
  gemm_accumulate(av, bv, out);
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (t.needs_grad(a)) gemm_a_bt_accumulate(g, t.value(b), t.grad(a));
    if (t.needs_grad(b)) gemm_at_b_accumulate(t.value(a), g, t.grad(b));
  });
}

inline Var add(Var a, Var b) {
  detail::require_same_tape(a, b);
  detail::require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  detail::add_into(out, b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (t.needs_grad(a)) detail::add_into(t.grad(a), g);
    if (t.needs_grad(b)) detail::add_into(t.grad(b), g);
  });
}

/// x[rows x d] + bias[1 x d] on every row.
inline Var add_bias(Var x, Var bias) {
  detail::require_same_tape(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw DimensionError("add_bias: shape mismatch " + xv.shape_string() + " + " + bv.shape_string());
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  return x.tape->record(std::move(out), {x, bias}, [x, bias](Tape& t, const Tensor& g) {
    if (t.needs_grad(x)) detail::add_into(t.grad(x), g);
    if (t.needs_grad(bias)) {
      Tensor& gb = t.grad(bias);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
    }
  });
}

inline Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return x.tape->record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(x);
    Tensor& gx = t.grad(x);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (xv.values()[k] > 0.0) gx.values()[k] += g.values()[k];
    }
  });
}

/// c * x for a constant c.
inline Var scale(Var x, double c) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= c;
  return x.tape->record(std::move(out), {x}, [x, c](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(x);
    for (std::size_t k = 0; k < g.size(); ++k) gx.values()[k] += c * g.values()[k];
  });
}

/// (offset + s) * x for a 1x1 variable s; with offset 1 this is (1 + eps) * h.
inline Var scale_by(Var x, Var s, double offset) {
  detail::require_same_tape(x, s);
  if (s.rows() != 1 || s.cols() != 1) throw DimensionError("scale_by: factor must be [1x1], got " + s.value().shape_string());
  const double c = offset + s.value()(0, 0);
  Tensor out = x.value();
  for (double& v : out.values()) v *= c;
  return x.tape->record(std::move(out), {x, s}, [x, s, c](Tape& t, const Tensor& g) {
    if (t.needs_grad(x)) {
      Tensor& gx = t.grad(x);
      for (std::size_t k = 0; k < g.size(); ++k) gx.values()[k] += c * g.values()[k];
    }
    if (t.needs_grad(s)) {
      const Tensor& xv = t.value(x);
      double acc = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) acc += g.values()[k] * xv.values()[k];
      t.grad(s)(0, 0) += acc;
    }
  });
}

/// Column-wise concatenation of matrices with equal row counts.
inline Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw PreconditionError("concat_cols needs at least one input");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    detail::require_same_tape(parts[0], p);
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + parts[0].value().shape_string() + " vs " +
                           p.value().shape_string());
    }
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::size_t at = 0;
  for (Var p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < pv.cols(); ++j) out(i, at + j) = pv(i, j);
    at += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape->record(std::move(out), parts, [inputs](Tape& t, const Tensor& g) {
    std::size_t at = 0;
    for (Var p : inputs) {
      const std::size_t c = t.value(p).cols();
      if (t.needs_grad(p)) {
        Tensor& gp = t.grad(p);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) gp(i, j) += g(i, at + j);
      }
      at += c;
    }
  });
}

inline Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

/// Sum of all entries, as a 1x1 value.
inline Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return x.tape->record(Tensor(1, 1, s), {x}, [x](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(x);
    for (double& v : gx.values()) v += g(0, 0);
  });
}

namespace detail {

inline void check_segments(const char* op, const Tensor& x, const Segments& seg) {
  for (std::size_t i : seg.index) {
    if (i >= x.rows()) {
      throw DimensionError(std::string(op) + ": segment index " + std::to_string(i) + " outside " +
                           x.shape_string());
    }
  }
}

}  // namespace detail

namespace detail {

// Column sums of the rows in segment s, each added in ascending value order,
// so the result depends only on the multiset of rows and not on their order.
inline void segment_column_sums(const Tensor& x, const Segments& seg, std::size_t s, double* out,
                                std::vector<double>& scratch) {
  const std::size_t d = x.cols();
  const std::size_t b = seg.offsets[s], e = seg.offsets[s + 1];
  if (e - b <= 2) {  // a + b == b + a exactly
    for (std::size_t p = b; p < e; ++p) {
      const double* r = x.data() + seg.index[p] * d;
      for (std::size_t j = 0; j < d; ++j) out[j] += r[j];
    }
    return;
  }
  scratch.resize(e - b);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t p = b; p < e; ++p) scratch[p - b] = x(seg.index[p], j);
    std::sort(scratch.begin(), scratch.end());
    double acc = 0.0;
    for (double v : scratch) acc += v;
    out[j] = acc;
  }
}

inline void scatter_segments(const Tensor& g, const Segments& seg, Tensor& gx, bool mean) {
  const std::size_t d = g.cols();
  for (std::size_t s = 0; s < seg.count(); ++s) {
    const std::size_t m = seg.size(s);
    if (m == 0) continue;
    const double w = mean ? 1.0 / static_cast<double>(m) : 1.0;
    const double* gs = g.data() + s * d;
    for (std::size_t p = seg.offsets[s]; p < seg.offsets[s + 1]; ++p) {
      double* r = gx.data() + seg.index[p] * d;
      for (std::size_t j = 0; j < d; ++j) r[j] += gs[j] * w;
    }
  }
}

}  // namespace detail

/// Output row s = sum of x rows in segment s (zero for an empty segment).
/// Invariant to the order of indices within a segment, bit for bit.
inline Var row_sum(Var x, const Segments& seg) {
  const Tensor& xv = x.value();
  detail::check_segments("row_sum", xv, seg);
  Tensor out(seg.count(), xv.cols());
  std::vector<double> scratch;
  for (std::size_t s = 0; s < seg.count(); ++s) {
    detail::segment_column_sums(xv, seg, s, out.data() + s * xv.cols(), scratch);
  }
  const Segments* sp = &seg;
  return x.tape->record(std::move(out), {x}, [x, sp](Tape& t, const Tensor& g) {
    detail::scatter_segments(g, *sp, t.grad(x), false);
  });
}

/// Output row s = mean of x rows in segment s (zero for an empty segment),
/// computed as the row_sum times 1/m.
inline Var row_mean(Var x, const Segments& seg) {
  const Tensor& xv = x.value();
  detail::check_segments("row_mean", xv, seg);
  const std::size_t d = xv.cols();
  Tensor out(seg.count(), d);
  std::vector<double> scratch;
  for (std::size_t s = 0; s < seg.count(); ++s) {
    const std::size_t m = seg.size(s);
    if (m == 0) continue;
    double* o = out.data() + s * d;
    detail::segment_column_sums(xv, seg, s, o, scratch);
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < d; ++j) o[j] *= inv;
  }
  const Segments* sp = &seg;
  return x.tape->record(std::move(out), {x}, [x, sp](Tape& t, const Tensor& g) {
    detail::scatter_segments(g, *sp, t.grad(x), true);
  });
}

/// Output row s = element-wise max of x rows in segment s; an empty segment
/// gives the zero row. The gradient goes to the first maximal row in index
/// order.
inline Var row_max(Var x, const Segments& seg) {
  const Tensor& xv = x.value();
  detail::check_segments("row_max", xv, seg);
  const std::size_t d = xv.cols();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  Tensor out(seg.count(), d);
  std::vector<std::size_t> argmax(seg.count() * d, kNone);
  for (std::size_t s = 0; s < seg.count(); ++s) {
    for (std::size_t p = seg.offsets[s]; p < seg.offsets[s + 1]; ++p) {
      const std::size_t r = seg.index[p];
      for (std::size_t j = 0; j < d; ++j) {
        std::size_t& a = argmax[s * d + j];
        if (a == kNone || xv(r, j) > out(s, j)) {
          a = r;
          out(s, j) = xv(r, j);
        }
      }
    }
  }
  return x.tape->record(std::move(out), {x}, [x, argmax = std::move(argmax), d](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(x);
    for (std::size_t k = 0; k < argmax.size(); ++k) {
      if (argmax[k] != kNone) gx(argmax[k], k % d) += g.values()[k];
    }
  });
}

/// Mean softmax cross-entropy over rows; labels[i] is the class of row i.
inline Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
  const Tensor& z = logits.value();
  if (labels.size() != z.rows()) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                         z.shape_string());
  }
  if (z.rows() == 0) throw PreconditionError("softmax_cross_entropy on an empty batch");
  Tensor probs(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (labels[i] >= z.cols()) {
      throw DimensionError("label " + std::to_string(labels[i]) + " outside logits " + z.shape_string());
    }
    const auto row = z.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double norm = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) norm += (probs(i, c) = std::exp(row[c] - m));
    for (std::size_t c = 0; c < z.cols(); ++c) probs(i, c) /= norm;
    loss -= (row[labels[i]] - m) - std::log(norm);
  }
  const double n = static_cast<double>(z.rows());
  std::vector<std::size_t> y(labels.begin(), labels.end());
  return logits.tape->record(Tensor(1, 1, loss / n), {logits},
                             [logits, probs = std::move(probs), y = std::move(y), n](Tape& t, const Tensor& g) {
                               Tensor& gz = t.grad(logits);
                               const double s = g(0, 0) / n;
                               for (std::size_t i = 0; i < probs.rows(); ++i) {
                                 for (std::size_t c = 0; c < probs.cols(); ++c) {
                                   gz(i, c) += s * (probs(i, c) - (c == y[i] ? 1.0 : 0.0));
                                 }
                               }
                             });
}

/// Affine map x W + b with Glorot-initialized W[in x out] and zero b.
struct Linear {
  Parameter weight;
  Parameter bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, std::mt19937_64& rng, const std::string& name)
      : weight(name + ".weight", glorot_uniform(in, out, rng)), bias(name + ".bias", Tensor(1, out)) {}

  std::size_t in_dim() const { return weight.value.rows(); }
  std::size_t out_dim() const { return weight.value.cols(); }

  Var operator()(Tape& tape, Var x) {
    if (x.cols() != in_dim()) {
      throw DimensionError(weight.name + ": input " + x.value().shape_string() + " does not match weight " +
                           weight.value.shape_string());
    }
    return add_bias(matmul(x, tape.parameter(weight)), tape.parameter(bias));
  }

  void collect(std::vector<Parameter*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

/// Per-column batch normalization with learnable scale and shift.
///
/// Training mode normalizes with the batch mean and (biased) variance and
/// folds both into running statistics with momentum 0.1; eval mode uses the
/// running statistics, so repeated identical batches make the two agree.
class BatchNorm {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm() = default;
  BatchNorm(std::size_t dim, const std::string& name)
      : gamma_(name + ".gamma", Tensor(1, dim, 1.0)), beta_(name + ".beta", Tensor(1, dim)),
        running_mean_(1, dim, 0.0), running_var_(1, dim, 1.0) {}

  std::size_t dim() const { return gamma_.value.cols(); }
  Parameter& gamma() { return gamma_; }
  Parameter& beta() { return beta_; }
  const Tensor& running_mean() const { return running_mean_; }
  const Tensor& running_var() const { return running_var_; }
  Tensor& running_mean() { return running_mean_; }
  Tensor& running_var() { return running_var_; }

  Var operator()(Tape& tape, Var x, bool training) {
    const Tensor& xv = x.value();
    const std::size_t n = xv.rows(), d = xv.cols();
    if (d != dim()) throw DimensionError(gamma_.name + ": input " + xv.shape_string() + " for dimension " + std::to_string(dim()));
    Var gamma = tape.parameter(gamma_);
    Var beta = tape.parameter(beta_);
    if (!training) {
      Tensor out(n, d);
      std::vector<double> a(d), b(d);
      for (std::size_t j = 0; j < d; ++j) {
        a[j] = gamma_.value(0, j) / std::sqrt(running_var_(0, j) + kEpsilon);
        b[j] = beta_.value(0, j) - a[j] * running_mean_(0, j);
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out(i, j) = a[j] * xv(i, j) + b[j];
      std::vector<double> inv(d);
      for (std::size_t j = 0; j < d; ++j) inv[j] = 1.0 / std::sqrt(running_var_(0, j) + kEpsilon);
      const Tensor mean = running_mean_;
      return tape.record(std::move(out), {x, gamma, beta},
                         [x, gamma, beta, inv = std::move(inv), mean](Tape& t, const Tensor& g) {
                           const Tensor& xv = t.value(x);
                           const Tensor& gv = t.value(gamma);
                           for (std::size_t i = 0; i < g.rows(); ++i) {
                             for (std::size_t j = 0; j < g.cols(); ++j) {
                               const double xhat = (xv(i, j) - mean(0, j)) * inv[j];
                               if (t.needs_grad(x)) t.grad(x)(i, j) += g(i, j) * gv(0, j) * inv[j];
                               if (t.needs_grad(gamma)) t.grad(gamma)(0, j) += g(i, j) * xhat;
                               if (t.needs_grad(beta)) t.grad(beta)(0, j) += g(i, j);
                             }
                           }
                         });
    }
    if (n == 0) throw PreconditionError(gamma_.name + ": batch normalization needs at least one row");
    Tensor xhat(n, d);
    std::vector<double> inv_std(d);
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += xv(i, j);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) var += (xv(i, j) - mean) * (xv(i, j) - mean);
      var /= static_cast<double>(n);
      inv_std[j] = 1.0 / std::sqrt(var + kEpsilon);
      for (std::size_t i = 0; i < n; ++i) xhat(i, j) = (xv(i, j) - mean) * inv_std[j];
      running_mean_(0, j) = (1.0 - kMomentum) * running_mean_(0, j) + kMomentum * mean;
      running_var_(0, j) = (1.0 - kMomentum) * running_var_(0, j) + kMomentum * var;
    }
    Tensor out(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) out(i, j) = gamma_.value(0, j) * xhat(i, j) + beta_.value(0, j);
    return tape.record(
        std::move(out), {x, gamma, beta},
        [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, const Tensor& g) {
          const std::size_t n = g.rows(), d = g.cols();
          const Tensor& gv = t.value(gamma);
          for (std::size_t j = 0; j < d; ++j) {
            double sum_g = 0.0, sum_gx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              sum_g += g(i, j);
              sum_gx += g(i, j) * xhat(i, j);
            }
            if (t.needs_grad(gamma)) t.grad(gamma)(0, j) += sum_gx;
            if (t.needs_grad(beta)) t.grad(beta)(0, j) += sum_g;
            if (t.needs_grad(x)) {
              Tensor& gx = t.grad(x);
              const double k = gv(0, j) * inv_std[j] / static_cast<double>(n);
              for (std::size_t i = 0; i < n; ++i) {
                gx(i, j) += k * (static_cast<double>(n) * g(i, j) - sum_g - xhat(i, j) * sum_gx);
              }
            }
          }
        });
  }

  void collect(std::vector<Parameter*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

 private:
  Parameter gamma_;
  Parameter beta_;
  Tensor running_mean_;
  Tensor running_var_;
};

/// Inverted dropout: in training each entry is zeroed with probability p and
/// survivors are scaled by 1 / (1 - p). Identity in eval mode or when p = 0.
inline Var dropout(Var x, double p, bool training, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw PreconditionError("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  Tensor mask(x.rows(), x.cols());
  for (double& m : mask.values()) m = uniform01(rng) < p ? 0.0 : keep_scale;
  Tensor out = x.value();
  for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] *= mask.values()[k];
  return x.tape->record(std::move(out), {x}, [x, mask = std::move(mask)](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(x);
    for (std::size_t k = 0; k < g.size(); ++k) gx.values()[k] += g.values()[k] * mask.values()[k];
  });
}

struct AdamOptions {
  double learning_rate = 0.01;
  double decay = 0.5;
  std::size_t decay_every = 50;  // epochs
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction and a step learning-rate schedule
/// lr(epoch) = learning_rate * decay^floor(epoch / decay_every).
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamOptions options = {}) : params_(std::move(params)), options_(options) {
    for (Parameter* p : params_) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  double learning_rate(std::size_t epoch) const {
    return options_.learning_rate * std::pow(options_.decay, static_cast<double>(epoch / options_.decay_every));
  }

  void zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
  }

  void step(std::size_t epoch) {
    ++steps_;
    const double lr = learning_rate(epoch);
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Parameter& p = *params_[i];
      if (!p.grad.same_shape(p.value)) {
        throw DimensionError(p.name + ": gradient " + p.grad.shape_string() + " vs value " + p.value.shape_string());
      }
      auto& m = m_[i].values();
      auto& v = v_[i].values();
      auto& w = p.value.values();
      const auto& g = p.grad.values();
      for (std::size_t k = 0; k < w.size(); ++k) {
        m[k] = options_.beta1 * m[k] + (1.0 - options_.beta1) * g[k];
        v[k] = options_.beta2 * v[k] + (1.0 - options_.beta2) * g[k] * g[k];
        w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + options_.epsilon);
      }
    }
  }

  std::size_t steps() const { return steps_; }

 private:
  std::vector<Parameter*> params_;
  AdamOptions options_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t steps_ = 0;
};

namespace detail {

inline std::uint64_t byteswap64(std::uint64_t x) {
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((x >> (8 * i)) & 0xff) << (8 * (7 - i));
  return out;
}

}  // namespace detail

/// Writes `<base>.bin` (float64 little-endian values of every parameter in
/// order) and `<base>.json` (names, shapes and offsets).
inline void save_checkpoint(std::span<Parameter* const> params, const std::filesystem::path& base) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "f64le";
  manifest["parameters"] = nlohmann::ordered_json::array();
  auto bin_path = base;
  bin_path += ".bin";
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw LoadError("cannot write " + bin_path.string());
  std::size_t offset = 0;
  for (const Parameter* p : params) {
    manifest["parameters"].push_back(
        {{"name", p->name}, {"shape", {p->value.rows(), p->value.cols()}}, {"offset", offset}});
    for (double v : p->value.values()) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = detail::byteswap64(bits);
      bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    offset += p->value.size();
  }
  auto json_path = base;
  json_path += ".json";
  std::ofstream(json_path) << manifest.dump(2) << '\n';
}

/// Loads values written by save_checkpoint into `params`; names and shapes
/// must match exactly.
inline void load_checkpoint(std::span<Parameter* const> params, const std::filesystem::path& base) {
  auto json_path = base;
  json_path += ".json";
  auto bin_path = base;
  bin_path += ".bin";
  std::ifstream js(json_path);
  if (!js) throw LoadError("cannot read " + json_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(json_path.string() + ": " + e.what());
  }
  const auto& entries = manifest.at("parameters");
  if (entries.size() != params.size()) {
    throw FormatError(json_path.string() + ": " + std::to_string(entries.size()) + " parameters, expected " +
                      std::to_string(params.size()));
  }
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw LoadError("cannot read " + bin_path.string());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    const auto& e = entries[i];
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    if (e.at("name").get<std::string>() != p.name || shape.size() != 2 || shape[0] != p.value.rows() ||
        shape[1] != p.value.cols()) {
      throw FormatError(json_path.string() + ": entry " + std::to_string(i) + " does not match parameter " +
                        p.name + " " + p.value.shape_string());
    }
    bin.seekg(static_cast<std::streamoff>(e.at("offset").get<std::size_t>() * sizeof(double)));
    for (double& v : p.value.values()) {
      std::uint64_t bits = 0;
      if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw FormatError(bin_path.string() + ": truncated at parameter " + p.name);
      }
      if constexpr (std::endian::native == std::endian::big) bits = detail::byteswap64(bits);
      v = std::bit_cast<double>(bits);
    }
  }
}

}  // namespace ginlab
