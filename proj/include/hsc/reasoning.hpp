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

// Hierarchical beam search over a taxonomy ("group reasoning").
//
// The beam starts at the synthetic root. At the step for declared level L,
// every child of a beam node whose level is exactly L is scored by cosine in
// that level's space, with the query and class vectors both mapped through
// the level's adapter. A beam node is also carried into the candidate set,
// keeping its earlier score and costing nothing, when it is a leaf or has
// children deeper than L. The best k candidates (score desc, code asc) form
// the next beam. Scores are never combined across levels.
//
// The answer is the full candidate set of the last step, ranked and cut to
// final_list_size.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsc/adapter.hpp"
#include "hsc/embedding.hpp"
#include "hsc/error.hpp"
#include "hsc/taxonomy.hpp"

namespace hsc {

struct LevelBinding {
  std::string name_space;
  std::optional<Adapter> adapter;
};

struct BeamConfig {
  std::size_t k = 1;
  std::size_t final_list_size = 10;
  std::map<int, LevelBinding> levels;
};

struct ClassificationResult {
  std::string id;
  std::vector<ScoredId> ranked_leaves;
  std::uint64_t similarity_count = 0;
  std::vector<std::uint64_t> visited_per_level;
  std::vector<std::vector<std::string>> beam_trace;

  /// Top-1 code (argmax of the final candidate set).
  const std::string& best() const {
    if (ranked_leaves.empty()) throw RuntimeError("empty classification result");
    return ranked_leaves.front().id;
  }
};

/// Query vectors keyed by taxonomy level, in each level's base space.
using LevelQueries = std::map<int, std::span<const float>>;

/// Class vectors per level, already mapped through that level's adapter, so
/// a query costs one adapter application per level plus the cosines.
class HierarchicalIndex {
 public:
  HierarchicalIndex(const Taxonomy& tax,
                    const std::map<std::string, EmbeddingStore>& stores,
                    const BeamConfig& config)
      : tax_(&tax), k_(config.k), final_list_size_(config.final_list_size) {
    if (k_ == 0) throw PreconditionError("beam k must be >= 1");
    if (final_list_size_ == 0) {
      throw PreconditionError("final_list_size must be >= 1");
    }
    if (tax.size() == 0) throw ValidationError("taxonomy is empty");
    for (int level : tax.levels()) {
      const auto binding = config.levels.find(level);
      if (binding == config.levels.end()) {
        throw ValidationError("level " + std::to_string(level) +
                              " has no embedding namespace mapping");
      }
      const auto store = stores.find(binding->second.name_space);
      if (store == stores.end()) {
        throw ValidationError("level " + std::to_string(level) +
                              ": embedding namespace '" +
                              binding->second.name_space + "' is not loaded");
      }
      Level lv;
      lv.level = level;
      lv.adapter = binding->second.adapter;
      if (lv.adapter && lv.adapter->dim() != store->second.dim()) {
        throw ValidationError("level " + std::to_string(level) + ": adapter dim " +
                              std::to_string(lv.adapter->dim()) +
                              " != namespace dim " +
                              std::to_string(store->second.dim()));
      }
      lv.documents = EmbeddingStore(store->second.name_space(),
                                    store->second.dim());
      for (const auto& code : tax.codes_at_level(level)) {
        const auto row = store->second.find(code);
        if (!row) {
          throw ValidationError("node '" + code +
                                "' has no embedding in namespace '" +
                                store->second.name_space() + "'");
        }
        const auto base = store->second.row(*row);
        if (lv.adapter) {
          lv.documents.add(code, lv.adapter->apply(base));
        } else {
          lv.documents.add(code, base);
        }
      }
      levels_.push_back(std::move(lv));
    }
  }

  const Taxonomy& taxonomy() const noexcept { return *tax_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t final_list_size() const noexcept { return final_list_size_; }

  /// Class vectors of `level` in adapted space.
  const EmbeddingStore& documents(int level) const {
    return levels_[tax_->level_position(level)].documents;
  }

  ClassificationResult group_reason(const LevelQueries& queries) const {
    ClassificationResult result;
    std::vector<ScoredId> beam{{std::string(Taxonomy::kRoot), 0.0}};
    std::vector<ScoredId> candidates;

    for (const auto& lv : levels_) {
      const auto q = adapted_query(lv, queries);
      const double qn = norm(q);
      if (qn == 0.0) {
        throw PreconditionError("zero-norm query at level " +
                                std::to_string(lv.level));
      }
      candidates.clear();
      std::uint64_t scored = 0;
      for (const auto& entry : beam) {
        const bool is_root = entry.id.empty();
        bool carry = false;
        const auto kids = tax_->child_codes(entry.id);
        if (kids.empty()) carry = true;
        for (const auto& child : kids) {
          const int child_level = tax_->node(child).level;
          if (child_level == lv.level) {
            const auto row = *lv.documents.find(child);
            candidates.push_back(
                {child, cosine_with_norms(q, qn, lv.documents.row(row),
                                          lv.documents.row_norm(row))});
            ++scored;
          } else if (child_level > lv.level) {
            carry = true;
          }
        }
        if (carry && !is_root) candidates.push_back(entry);
      }
      result.similarity_count += scored;
      result.visited_per_level.push_back(scored);

      std::sort(candidates.begin(), candidates.end(), ranks_before);
      beam.assign(candidates.begin(),
                  candidates.begin() +
                      static_cast<long>(std::min(k_, candidates.size())));
      auto& trace = result.beam_trace.emplace_back();
      for (const auto& b : beam) trace.push_back(b.id);
    }

    candidates.resize(std::min(final_list_size_, candidates.size()));
    result.ranked_leaves = std::move(candidates);
    return result;
  }

  /// Exhaustive search over the last level's classes in its adapted space.
  ClassificationResult flat(const LevelQueries& queries) const {
    const auto& lv = levels_.back();
    const auto q = adapted_query(lv, queries);
    ClassificationResult result;
    result.ranked_leaves = flat_mips(q, lv.documents, final_list_size_);
    result.similarity_count = lv.documents.size();
    result.visited_per_level.push_back(lv.documents.size());
    return result;
  }

 private:
  struct Level {
    int level = 0;
    std::optional<Adapter> adapter;
    EmbeddingStore documents;
  };

  std::vector<float> adapted_query(const Level& lv,
                                   const LevelQueries& queries) const {
    const auto it = queries.find(lv.level);
    if (it == queries.end()) {
      throw ValidationError("no query vector for level " +
                            std::to_string(lv.level));
    }
    if (it->second.size() != lv.documents.dim()) {
      throw PreconditionError("query dim " + std::to_string(it->second.size()) +
                              " != level " + std::to_string(lv.level) +
                              " dim " + std::to_string(lv.documents.dim()));
    }
    if (lv.adapter) return lv.adapter->apply(it->second);
    return {it->second.begin(), it->second.end()};
  }

  const Taxonomy* tax_;
  std::size_t k_;
  std::size_t final_list_size_;
  std::vector<Level> levels_;
};

/// Largest candidate set an unpruned beam meets on `tax`. Any k at least
/// this large makes the search exhaustive, so its final ranking equals a
/// flat search over the last level.
inline std::size_t exhaustive_beam_width(const Taxonomy& tax) {
  std::vector<std::string> beam{std::string(Taxonomy::kRoot)};
  std::size_t widest = 0;
  for (int level : tax.levels()) {
    std::vector<std::string> next;
    for (const auto& code : beam) {
      bool carry = false;
      const auto kids = tax.child_codes(code);
      if (kids.empty()) carry = true;
      for (const auto& child : kids) {
        const int child_level = tax.node(child).level;
        if (child_level == level) {
          next.push_back(child);
        } else if (child_level > level) {
          carry = true;
        }
      }
      if (carry && !code.empty()) next.push_back(code);
    }
    widest = std::max(widest, next.size());
    beam = std::move(next);
  }
  return widest;
}

/// One-shot convenience wrapper; build a HierarchicalIndex for batches.
inline ClassificationResult group_reason(
    const LevelQueries& queries, const Taxonomy& tax,
    const std::map<std::string, EmbeddingStore>& stores,
    const BeamConfig& config) {
  return HierarchicalIndex(tax, stores, config).group_reason(queries);
}

enum class SearchMode { kFlat, kGroup };

struct QueryInput {
  std::string id;
  LevelQueries vectors;
};

using QueryError = ItemError;

struct BatchResult {
  std::vector<ClassificationResult> results;  // successes, in input order
  std::vector<QueryError> errors;             // failures, in input order
  std::uint64_t total_similarity_count = 0;
};

/// Classifies every query independently. Work is split across `threads`
/// workers by stride; output order always follows input order.
inline BatchResult classify_batch(std::span<const QueryInput> queries,
                                  const HierarchicalIndex& index,
                                  SearchMode mode, unsigned threads = 1) {
  std::vector<std::optional<ClassificationResult>> slots(queries.size());
  std::vector<std::string> failures(queries.size());

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < queries.size(); i += stride) {
      try {
        auto r = mode == SearchMode::kGroup
                     ? index.group_reason(queries[i].vectors)
                     : index.flat(queries[i].vectors);
        r.id = queries[i].id;
        slots[i] = std::move(r);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };

  threads = std::max(1u, threads);
  if (threads == 1 || queries.size() < 2) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  BatchResult out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (slots[i]) {
      out.total_similarity_count += slots[i]->similarity_count;
      out.results.push_back(std::move(*slots[i]));
    } else {
      out.errors.push_back({queries[i].id, failures[i]});
    }
  }
  return out;
}

/// {"id", "leaves": [{"code", "score"}...], "similarity_count", "beam"}
inline std::string result_json(const ClassificationResult& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  auto& leaves = j["leaves"] = nlohmann::ordered_json::array();
  for (const auto& leaf : r.ranked_leaves) {
    leaves.push_back({{"code", leaf.id}, {"score", leaf.score}});
  }
  j["similarity_count"] = r.similarity_count;
  j["beam"] = r.beam_trace;
  return j.dump();
}

inline std::string results_jsonl(std::span<const ClassificationResult> results) {
  std::string out;
  for (const auto& r : results) {
    out += result_json(r);
    out += '\n';
  }
  return out;
}

}  // namespace hsc
