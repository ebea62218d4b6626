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

// L2-regularized multinomial logistic regression trained with L-BFGS. Used as
// the classifier on top of explicit WL subtree features.

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "ginlab/error.hpp"

namespace ginlab {

/// Row-major dense design matrix.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

struct LbfgsOptions {
  std::size_t max_iterations = 500;
  std::size_t history = 10;
  double gradient_tolerance = 1e-7;
};

class LogisticRegression {
 public:
  LogisticRegression() = default;
  LogisticRegression(std::size_t num_features, std::size_t num_classes)
      : num_features_(num_features), num_classes_(num_classes),
        theta_((num_features + 1) * num_classes, 0.0) {}

  /// Minimizes mean cross-entropy + (lambda / 2) * ||W||^2 (bias unpenalized).
  static LogisticRegression fit(const DesignMatrix& x, std::span<const std::size_t> y,
                                std::size_t num_classes, double lambda, LbfgsOptions options = {}) {
    if (x.rows != y.size()) throw DimensionError("design matrix rows do not match label count");
    if (x.rows == 0) throw PreconditionError("cannot fit on an empty training set");
    LogisticRegression model(x.cols, num_classes);
    model.minimize(x, y, lambda, options);
    return model;
  }

  std::vector<double> logits(std::span<const double> features) const {
    std::vector<double> z(num_classes_);
    const double* bias = theta_.data() + num_features_ * num_classes_;
    for (std::size_t c = 0; c < num_classes_; ++c) z[c] = bias[c];
    for (std::size_t f = 0; f < num_features_; ++f) {
      const double v = features[f];
      if (v == 0.0) continue;
      const double* w = theta_.data() + f * num_classes_;
      for (std::size_t c = 0; c < num_classes_; ++c) z[c] += v * w[c];
    }
    return z;
  }

  std::size_t predict(std::span<const double> features) const {
    const auto z = logits(features);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
  }

  double accuracy(const DesignMatrix& x, std::span<const std::size_t> y) const {
    if (x.rows == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x.rows; ++i) hits += predict(x.row(i)) == y[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(x.rows);
  }

  std::size_t iterations_used() const { return iterations_; }

 private:
  double objective(const DesignMatrix& x, std::span<const std::size_t> y, double lambda,
                   const std::vector<double>& theta, std::vector<double>& grad) const {
    const std::size_t C = num_classes_, F = num_features_;
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    std::vector<double> z(C);
    const double inv_n = 1.0 / static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto row = x.row(i);
      for (std::size_t c = 0; c < C; ++c) z[c] = theta[F * C + c];
      for (std::size_t f = 0; f < F; ++f) {
        if (row[f] == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) z[c] += row[f] * theta[f * C + c];
      }
      const double zmax = *std::max_element(z.begin(), z.end());
      double norm = 0.0;
      for (double& v : z) norm += (v = std::exp(v - zmax));
      loss += -std::log(z[y[i]] / norm) * inv_n;
      for (std::size_t c = 0; c < C; ++c) {
        const double r = (z[c] / norm - (c == y[i] ? 1.0 : 0.0)) * inv_n;
        grad[F * C + c] += r;
        for (std::size_t f = 0; f < F; ++f) {
          if (row[f] != 0.0) grad[f * C + c] += r * row[f];
        }
      }
    }
    for (std::size_t k = 0; k < F * C; ++k) {
      loss += 0.5 * lambda * theta[k] * theta[k];
      grad[k] += lambda * theta[k];
    }
    return loss;
  }

  void minimize(const DesignMatrix& x, std::span<const std::size_t> y, double lambda,
                const LbfgsOptions& options) {
    const std::size_t d = theta_.size();
    const auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
      return s;
    };
    std::vector<double> grad(d), next(d), next_grad(d), dir(d);
    double f = objective(x, y, lambda, theta_, grad);
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    for (iterations_ = 0; iterations_ < options.max_iterations; ++iterations_) {
      double gmax = 0.0;
      for (double g : grad) gmax = std::max(gmax, std::abs(g));
      if (gmax < options.gradient_tolerance) break;

      // Two-loop recursion.
      dir = grad;
      std::vector<double> alpha(s_hist.size());
      for (std::size_t j = s_hist.size(); j-- > 0;) {
        alpha[j] = rho_hist[j] * dot(s_hist[j], dir);
        for (std::size_t k = 0; k < d; ++k) dir[k] -= alpha[j] * y_hist[j][k];
      }
      if (!s_hist.empty()) {
        const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
        for (double& v : dir) v *= gamma;
      } else {
        double gnorm = std::sqrt(dot(grad, grad));
        for (double& v : dir) v /= std::max(gnorm, 1.0);
      }
      for (std::size_t j = 0; j < s_hist.size(); ++j) {
        const double beta = rho_hist[j] * dot(y_hist[j], dir);
        for (std::size_t k = 0; k < d; ++k) dir[k] += s_hist[j][k] * (alpha[j] - beta);
      }
      for (double& v : dir) v = -v;
      double slope = dot(grad, dir);
      if (slope >= 0.0) {
        // Not a descent direction; restart from steepest descent.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        for (std::size_t k = 0; k < d; ++k) dir[k] = -grad[k];
        slope = dot(grad, dir);
      }

      double step = 1.0;
      double f_next = 0.0;
      bool accepted = false;
      for (int tries = 0; tries < 40; ++tries) {
        for (std::size_t k = 0; k < d; ++k) next[k] = theta_[k] + step * dir[k];
        f_next = objective(x, y, lambda, next, next_grad);
        if (f_next <= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;

      std::vector<double> s(d), yv(d);
      for (std::size_t k = 0; k < d; ++k) {
        s[k] = next[k] - theta_[k];
        yv[k] = next_grad[k] - grad[k];
      }
      const double sy = dot(s, yv);
      if (sy > 1e-12) {
        s_hist.push_back(std::move(s));
        y_hist.push_back(std::move(yv));
        rho_hist.push_back(1.0 / sy);
        if (s_hist.size() > options.history) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
      const double improvement = f - f_next;
      theta_.swap(next);
      grad.swap(next_grad);
      f = f_next;
      if (improvement < 1e-12 * std::max(1.0, std::abs(f))) break;
    }
  }

  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> theta_;  // F rows of per-class weights, then the bias row
  std::size_t iterations_ = 0;
};

/// Scales every column by its maximum absolute value over `fit_rows`; columns
/// that are all zero there stay zero.
inline std::vector<double> max_abs_scales(const DesignMatrix& x, std::span<const std::size_t> fit_rows) {
  std::vector<double> scale(x.cols, 0.0);
  for (std::size_t i : fit_rows) {
    const auto row = x.row(i);
    for (std::size_t f = 0; f < x.cols; ++f) scale[f] = std::max(scale[f], std::abs(row[f]));
  }
  for (double& s : scale) s = s > 0.0 ? 1.0 / s : 0.0;
  return scale;
}

inline DesignMatrix select_rows(const DesignMatrix& x, std::span<const std::size_t> rows,
                                std::span<const double> scale) {
  DesignMatrix out{rows.size(), x.cols, std::vector<double>(rows.size() * x.cols)};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = x.row(rows[r]);
    for (std::size_t f = 0; f < x.cols; ++f) out.values[r * x.cols + f] = src[f] * scale[f];
  }
  return out;
}

}  // namespace ginlab
