// Copyright 2026 The HSC Authors.
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
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hsc/error.hpp"

namespace hsc {

/// Dense 32-bit embedding. Non-empty, all components finite.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<float> components)
      : components_(std::move(components)) {
    validate();
  }
  Vector(std::initializer_list<float> components) : components_(components) {
    validate();
  }

  std::size_t dim() const noexcept { return components_.size(); }
  std::span<const float> span() const noexcept { return components_; }
  operator std::span<const float>() const noexcept { return components_; }
  float operator[](std::size_t i) const { return components_[i]; }
  const std::vector<float>& components() const noexcept { return components_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  void validate() const {
    if (components_.empty()) throw PreconditionError("vector has dim 0");
    for (float c : components_) {
      if (!std::isfinite(c)) {
        throw PreconditionError("vector has a non-finite component");
      }
    }
  }

  std::vector<float> components_;
};

/// 64-bit accumulated dot product, summed in index order.
inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

inline double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

/// Cosine with pre-computed norms; clamps rounding overshoot to [-1, 1].
inline double cosine_with_norms(std::span<const float> a, double norm_a,
                                std::span<const float> b, double norm_b) {
  const double c = dot(a, b) / (norm_a * norm_b);
  return std::clamp(c, -1.0, 1.0);
}

inline double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw PreconditionError("cosine: dimension mismatch (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw PreconditionError("cosine: zero-norm input");
  }
  return cosine_with_norms(a, na, b, nb);
}

struct ScoredId {
  std::string id;
  double score = 0.0;

  friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

/// Descending score, then ascending id. A strict total order on distinct ids.
inline bool ranks_before(const ScoredId& a, const ScoredId& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

/// Keeps the best `k` entries of `items` in rank order.
inline void keep_top(std::vector<ScoredId>& items, std::size_t k) {
  k = std::min(k, items.size());
  std::partial_sort(items.begin(), items.begin() + static_cast<long>(k),
                    items.end(), ranks_before);
  items.resize(k);
}

/// Vectors of one encoder space, keyed by id. Rows are stored contiguously
/// in insertion order; norms are cached. Zero-norm rows are rejected.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::string name_space, std::size_t dim)
      : namespace_(std::move(name_space)), dim_(dim) {
    if (dim_ == 0) throw PreconditionError("embedding store dim must be >= 1");
  }

  const std::string& name_space() const noexcept { return namespace_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  void add(std::string id, std::span<const float> v) {
    if (v.size() != dim_) {
      throw ValidationError("namespace '" + namespace_ + "': vector for '" +
                            id + "' has " + std::to_string(v.size()) +
                            " components, expected " + std::to_string(dim_));
    }
    for (float c : v) {
      if (!std::isfinite(c)) {
        throw ValidationError("namespace '" + namespace_ + "': vector for '" +
                              id + "' has a non-finite component");
      }
    }
    const double n = norm(v);
    if (n == 0.0) {
      throw ValidationError("namespace '" + namespace_ + "': vector for '" +
                            id + "' has zero norm");
    }
    if (index_.contains(id)) {
      throw ValidationError("namespace '" + namespace_ + "': duplicate id '" +
                            id + "'");
    }
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), v.begin(), v.end());
    norms_.push_back(n);
  }

  const std::string& id(std::size_t row) const { return ids_[row]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
  }
  double row_norm(std::size_t i) const { return norms_[i]; }

  std::optional<std::size_t> find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view id) const { return find(id).has_value(); }

  std::span<const float> at(std::string_view id) const {
    const auto row_index = find(id);
    if (!row_index) {
      throw ValidationError("namespace '" + namespace_ + "': no embedding for '" +
                            std::string(id) + "'");
    }
    return row(*row_index);
  }

 private:
  std::string namespace_;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Exact maximum-inner-product search under cosine similarity: scores every
/// row and returns the best min(k, size) by `ranks_before`.
inline std::vector<ScoredId> flat_mips(std::span<const float> query,
                                       const EmbeddingStore& store,
                                       std::size_t k) {
  if (k == 0) throw PreconditionError("flat_mips: k must be >= 1");
  if (store.empty()) {
    throw PreconditionError("flat_mips: store '" + store.name_space() +
                            "' is empty");
  }
  if (query.size() != store.dim()) {
    throw PreconditionError("flat_mips: query dim " +
                            std::to_string(query.size()) + " != store dim " +
                            std::to_string(store.dim()));
  }
  const double qn = norm(query);
  if (qn == 0.0) throw PreconditionError("flat_mips: zero-norm query");

  std::vector<ScoredId> scored;
  scored.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    scored.push_back(
        {store.id(i),
         cosine_with_norms(query, qn, store.row(i), store.row_norm(i))});
  }
  keep_top(scored, k);
  return scored;
}

}  // namespace hsc
