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

// Exact multiset encodings.
//
// f(x) = N^(-s * Z(x)) where Z indexes the alphabet. A sum of at most N - 1
// such terms is a base-N^s expansion whose digits are the multiplicities, so
// the sum determines the multiset. All arithmetic is exact.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <map>
#include <ostream>
#include <vector>

#include "ginlab/error.hpp"
#include "ginlab/multiset.hpp"

namespace ginlab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// 1 / base^exponent, exactly.
inline Rational inverse_power(std::size_t base, std::size_t exponent) {
  return Rational(BigInt(1), boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(exponent)));
}

/// a + b * eps for a fixed irrational eps. Since a and b are rational, two
/// values are equal for any irrational eps iff both components agree.
struct EpsilonNumber {
  Rational a;
  Rational b;

  EpsilonNumber operator+(const EpsilonNumber& o) const { return {a + o.a, b + o.b}; }
  EpsilonNumber operator*(const Rational& k) const { return {a * k, b * k}; }
  bool operator==(const EpsilonNumber& o) const { return a == o.a && b == o.b; }
  bool operator<(const EpsilonNumber& o) const { return a < o.a || (a == o.a && b < o.b); }

  friend std::ostream& operator<<(std::ostream& os, const EpsilonNumber& e) {
    return os << "(" << e.a << ", " << e.b << ")";
  }
};

template <class T, class Compare = std::less<T>>
class InjectiveEncoder {
 public:
  /// `base` must exceed the size of every multiset encoded. `exponent_scale`
  /// is 1 for sums and 2 for means.
  InjectiveEncoder(std::vector<T> alphabet, std::size_t base, std::size_t exponent_scale = 1)
      : base_(base), scale_(exponent_scale) {
    if (base < 2) throw PreconditionError("encoder base must be at least 2");
    if (exponent_scale < 1) throw PreconditionError("encoder exponent scale must be at least 1");
    for (const auto& x : alphabet) {
      if (!index_.emplace(x, index_.size()).second) throw PreconditionError("alphabet has a repeated symbol");
    }
    for (std::size_t z = 0; z < index_.size(); ++z) powers_.push_back(inverse_power(base_, scale_ * z));
  }

  std::size_t base() const { return base_; }
  std::size_t alphabet_size() const { return index_.size(); }
  std::size_t exponent_scale() const { return scale_; }
  bool contains(const T& x) const { return index_.count(x) != 0; }

  /// Symbols in index order.
  std::vector<T> alphabet() const {
    std::vector<T> out(index_.size());
    for (const auto& [x, z] : index_) out[z] = x;
    return out;
  }

  std::size_t index(const T& x) const {
    auto it = index_.find(x);
    if (it == index_.end()) throw PreconditionError("symbol outside the encoder alphabet");
    return it->second;
  }

  const Rational& operator()(const T& x) const { return powers_[index(x)]; }

 private:
  std::size_t base_;
  std::size_t scale_;
  std::map<T, std::size_t, Compare> index_;
  std::vector<Rational> powers_;
};

/// Encoder over the symbols 0 .. alphabet_size-1.
inline InjectiveEncoder<std::size_t> index_encoder(std::size_t alphabet_size, std::size_t base,
                                                   std::size_t exponent_scale = 1) {
  std::vector<std::size_t> alphabet(alphabet_size);
  for (std::size_t i = 0; i < alphabet_size; ++i) alphabet[i] = i;
  return InjectiveEncoder<std::size_t>(std::move(alphabet), base, exponent_scale);
}

namespace detail {

template <class T, class C>
void require_encodable(const Multiset<T, C>& x, const InjectiveEncoder<T, C>& enc) {
  if (x.size() >= enc.base()) {
    throw PreconditionError("multiset of size " + std::to_string(x.size()) + " needs base > " +
                            std::to_string(x.size()) + ", got " + std::to_string(enc.base()));
  }
}

}  // namespace detail

/// sum over X of f(x).
template <class T, class C>
Rational sum_encoding(const Multiset<T, C>& x, const InjectiveEncoder<T, C>& enc) {
  detail::require_encodable(x, enc);
  Rational total = 0;
  for (const auto& [item, m] : x) total += enc(item) * static_cast<long long>(m);
  return total;
}

/// (1 + eps) f(c) + sum over X of f(x), as the pair (f(c) + sum, f(c)).
template <class T, class C>
EpsilonNumber gin_encoding(const T& c, const Multiset<T, C>& x, const InjectiveEncoder<T, C>& enc) {
  const Rational fc = enc(c);
  return {fc + sum_encoding(x, enc), fc};
}

/// (1 / |X|) sum over X of f(x); 0 for the empty multiset. With exponent
/// scale 2 the value determines the distribution of X.
template <class T, class C>
Rational mean_encoding(const Multiset<T, C>& x, const InjectiveEncoder<T, C>& enc) {
  if (x.empty()) return 0;
  return sum_encoding(x, enc) / static_cast<long long>(x.size());
}

/// Element-wise max of one-hot vectors: the indicator of the underlying set.
template <class T, class C>
std::vector<int> max_encoding(const Multiset<T, C>& x, const InjectiveEncoder<T, C>& enc) {
  std::vector<int> out(enc.alphabet_size(), 0);
  for (const auto& [item, m] : x) out[enc.index(item)] = 1;
  return out;
}

}  // namespace ginlab
