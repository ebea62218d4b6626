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

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <ostream>
#include <set>
#include <vector>

namespace ginlab {

/// A multiset (S, m): an underlying set S with multiplicities m(x) >= 1.
/// Elements are kept in canonical (Compare) order, so equality and
/// iteration never depend on insertion order.
template <class T, class Compare = std::less<T>>
class Multiset {
 public:
  using map_type = std::map<T, std::size_t, Compare>;
  using const_iterator = typename map_type::const_iterator;

  Multiset() = default;
  Multiset(std::initializer_list<T> items) {
    for (const auto& x : items) insert(x);
  }
  template <class Range>
  static Multiset from_range(const Range& items) {
    Multiset m;
    for (const auto& x : items) m.insert(x);
    return m;
  }

  void insert(const T& x, std::size_t count = 1) {
    if (count == 0) return;
    entries_[x] += count;
    size_ += count;
  }

  /// |X|, the sum of multiplicities.
  std::size_t size() const { return size_; }
  std::size_t distinct_count() const { return entries_.size(); }
  bool empty() const { return size_ == 0; }

  std::size_t multiplicity(const T& x) const {
    auto it = entries_.find(x);
    return it == entries_.end() ? 0 : it->second;
  }

  std::set<T, Compare> underlying_set() const {
    std::set<T, Compare> s;
    for (const auto& [x, m] : entries_) s.insert(x);
    return s;
  }

  /// Elements expanded with repetition, in canonical order.
  std::vector<T> elements() const {
    std::vector<T> out;
    out.reserve(size_);
    for (const auto& [x, m] : entries_) out.insert(out.end(), m, x);
    return out;
  }

  const map_type& entries() const { return entries_; }
  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }

  bool operator==(const Multiset& other) const { return entries_ == other.entries_; }
  bool operator<(const Multiset& other) const { return entries_ < other.entries_; }

  friend std::ostream& operator<<(std::ostream& os, const Multiset& m) {
    os << '{';
    bool first = true;
    for (const auto& x : m.elements()) {
      os << (first ? "" : ", ") << x;
      first = false;
    }
    return os << '}';
  }

 private:
  map_type entries_;
  std::size_t size_ = 0;
};

}  // namespace ginlab
