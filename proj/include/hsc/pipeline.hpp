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

// Glue between the modules: per-level embedding spaces, level-wise training
// pairs derived from leaf labels, and per-level adapter training.

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hsc/adapter.hpp"
#include "hsc/corpus.hpp"
#include "hsc/embedding.hpp"
#include "hsc/reasoning.hpp"
#include "hsc/rng.hpp"
#include "hsc/taxonomy.hpp"

namespace hsc {

/// Namespace used for a level's class vectors, e.g. "level6".
inline std::string level_namespace(int level) {
  return "level" + std::to_string(level);
}

/// Class vectors and query vectors living in one level's encoder space.
struct LevelSpace {
  EmbeddingStore documents;  // ids are taxonomy codes at the level
  EmbeddingStore queries;    // ids are enterprise ids
};

using PreparedEmbeddings = std::map<int, LevelSpace>;

using TruthSets = std::map<std::string, std::set<std::string>>;

inline TruthSets truth_sets(std::span<const EnterpriseRecord> records) {
  TruthSets out;
  for (const auto& r : records) {
    if (!r.naics_codes.empty()) {
      out[r.id] = {r.naics_codes.begin(), r.naics_codes.end()};
    }
  }
  return out;
}

/// Encodes class descriptions (per level) and enterprise descriptions with
/// `encode`, a callable taking a span of texts and returning vectors. Every
/// level shares the same query vectors. When `pre` is set, all texts are
/// preprocessed first.
template <typename EncodeFn>
PreparedEmbeddings encode_corpus(const Taxonomy& tax,
                                 std::span<const EnterpriseRecord> records,
                                 EncodeFn&& encode,
                                 const PreprocessConfig* pre = nullptr) {
  auto prepare_text = [&](const std::string& t) {
    return pre != nullptr ? preprocess(t, *pre) : t;
  };
  std::vector<std::string> query_texts;
  for (const auto& r : records) query_texts.push_back(prepare_text(r.description));
  const auto query_vectors = encode(std::span<const std::string>(query_texts));

  PreparedEmbeddings out;
  for (int level : tax.levels()) {
    const auto codes = tax.codes_at_level(level);
    std::vector<std::string> texts;
    for (const auto& c : codes) {
      const auto& n = tax.node(c);
      texts.push_back(prepare_text(n.title + " " + n.description));
    }
    const auto vectors = encode(std::span<const std::string>(texts));
    if (vectors.empty() || query_vectors.empty()) {
      throw ValidationError("encoder returned no vectors");
    }
    LevelSpace space{EmbeddingStore(level_namespace(level), vectors.front().size()),
                     EmbeddingStore("queries", query_vectors.front().size())};
    for (std::size_t i = 0; i < codes.size(); ++i) {
      space.documents.add(codes[i], vectors[i]);
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      space.queries.add(records[i].id, query_vectors[i]);
    }
    out.emplace(level, std::move(space));
  }
  return out;
}

/// (query id, ancestor-at-level of each truth label) for every id with a
/// truth set. Labels whose chain skips `level` contribute nothing.
inline std::vector<TrainPair> level_pairs(const Taxonomy& tax, int level,
                                          std::span<const std::string> ids,
                                          const TruthSets& truths) {
  std::vector<TrainPair> out;
  for (const auto& id : ids) {
    const auto t = truths.find(id);
    if (t == truths.end()) continue;
    std::set<std::string> targets;
    for (const auto& label : t->second) {
      if (auto a = tax.ancestor_at_level(label, level)) targets.insert(*a);
    }
    for (const auto& code : targets) out.push_back({id, code});
  }
  return out;
}

/// Trains one adapter per level. Each level's seed is
/// derive_seed(config.seed, level namespace).
inline std::map<int, TrainResult> train_level_adapters(
    const Taxonomy& tax, const PreparedEmbeddings& spaces,
    std::span<const std::string> train_ids, const TruthSets& truths,
    const TrainConfig& config) {
  std::map<int, TrainResult> out;
  for (const auto& [level, space] : spaces) {
    const auto pairs = level_pairs(tax, level, train_ids, truths);
    TrainConfig level_config = config;
    level_config.seed = derive_seed(config.seed, level_namespace(level));
    out.emplace(level, train(pairs, space.queries, space.documents,
                             level_config, space.documents.name_space()));
  }
  return out;
}

/// Namespace -> class store map and beam config for `spaces`, with the
/// given adapters (levels missing from `adapters` use none).
inline std::map<std::string, EmbeddingStore> document_stores(
    const PreparedEmbeddings& spaces) {
  std::map<std::string, EmbeddingStore> out;
  for (const auto& [level, space] : spaces) {
    out.emplace(space.documents.name_space(), space.documents);
  }
  return out;
}

inline BeamConfig make_beam_config(const PreparedEmbeddings& spaces,
                                   const std::map<int, Adapter>& adapters,
                                   std::size_t k,
                                   std::size_t final_list_size = 10) {
  BeamConfig config;
  config.k = k;
  config.final_list_size = final_list_size;
  for (const auto& [level, space] : spaces) {
    LevelBinding binding{space.documents.name_space(), std::nullopt};
    if (const auto a = adapters.find(level); a != adapters.end()) {
      binding.adapter = a->second;
    }
    config.levels.emplace(level, std::move(binding));
  }
  return config;
}

/// Query inputs for `ids`; spans point into `spaces`, which must outlive
/// the result.
inline std::vector<QueryInput> make_queries(const PreparedEmbeddings& spaces,
                                            std::span<const std::string> ids) {
  std::vector<QueryInput> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    QueryInput q{id, {}};
    for (const auto& [level, space] : spaces) {
      q.vectors.emplace(level, space.queries.at(id));
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace hsc
