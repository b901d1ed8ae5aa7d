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
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsc/adapter.hpp"
#include "hsc/error.hpp"
#include "hsc/io.hpp"
#include "hsc/pipeline.hpp"
#include "hsc/reasoning.hpp"
#include "hsc/taxonomy.hpp"

namespace hsc {

inline const std::set<std::string>& truth_for(const TruthSets& truths,
                                              const std::string& id) {
  const auto it = truths.find(id);
  if (it == truths.end()) {
    throw ValidationError("no ground truth for query '" + id + "'");
  }
  return it->second;
}

/// 1-based rank of the first ranked leaf in the truth set, if any.
inline std::optional<std::size_t> hit_rank(const ClassificationResult& r,
                                           const std::set<std::string>& truth) {
  for (std::size_t i = 0; i < r.ranked_leaves.size(); ++i) {
    if (truth.contains(r.ranked_leaves[i].id)) return i + 1;
  }
  return std::nullopt;
}

/// Percentage of results whose top-k intersects the truth set.
inline double acc_at_k(std::span<const ClassificationResult> results,
                       const TruthSets& truths, std::size_t k) {
  if (k < 1) throw PreconditionError("acc_at_k: k must be >= 1");
  if (results.empty()) throw PreconditionError("acc_at_k: no results");
  std::size_t hits = 0;
  for (const auto& r : results) {
    const auto rank = hit_rank(r, truth_for(truths, r.id));
    if (rank && *rank <= k) ++hits;
  }
  return 100.0 * static_cast<double>(hits) /
         static_cast<double>(results.size());
}

inline constexpr std::size_t kReportedKs[] = {1, 3, 5, 10};

struct EvalOutcome {
  std::map<std::size_t, double> acc_at;
  std::vector<std::optional<std::size_t>> hit_ranks;  // per result
  double mean_similarity_count = 0.0;
  double seconds = 0.0;
};

inline EvalOutcome evaluate(std::span<const ClassificationResult> results,
                            const TruthSets& truths, double seconds = 0.0) {
  EvalOutcome out;
  out.seconds = seconds;
  double sims = 0.0;
  for (const auto& r : results) {
    out.hit_ranks.push_back(hit_rank(r, truth_for(truths, r.id)));
    sims += static_cast<double>(r.similarity_count);
  }
  for (const auto k : kReportedKs) out.acc_at[k] = acc_at_k(results, truths, k);
  out.mean_similarity_count = sims / static_cast<double>(results.size());
  return out;
}

/// Everything needed to score one configuration on a fixed query set.
struct EvalDataset {
  const Taxonomy* taxonomy = nullptr;
  const std::map<std::string, EmbeddingStore>* stores = nullptr;
  std::vector<QueryInput> queries;
  TruthSets truths;
};

struct EvalRow {
  std::string config;
  std::optional<std::size_t> k;  // empty for flat search
  EvalOutcome outcome;
};

/// Runs one configuration; per-query failures abort the evaluation.
inline EvalOutcome run_eval(const EvalDataset& data, const BeamConfig& beam,
                            SearchMode mode) {
  const HierarchicalIndex index(*data.taxonomy, *data.stores, beam);
  const auto start = std::chrono::steady_clock::now();
  auto batch = classify_batch(data.queries, index, mode);
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  if (!batch.errors.empty()) {
    throw ValidationError("query '" + batch.errors.front().id +
                          "': " + batch.errors.front().message);
  }
  return evaluate(batch.results, data.truths, elapsed.count());
}

/// One group-reasoning evaluation per beam width in `ks`; `beam` supplies
/// the level bindings and list size.
inline std::vector<EvalRow> k_sweep(const EvalDataset& data,
                                    std::span<const std::size_t> ks,
                                    const BeamConfig& beam) {
  std::vector<EvalRow> rows;
  for (const auto k : ks) {
    BeamConfig config = beam;
    config.k = k;
    rows.push_back({"group", k, run_eval(data, config, SearchMode::kGroup)});
  }
  return rows;
}

struct AblationStages {
  bool preprocess = true;
  bool trained_adapter = true;
  bool group_reasoning = true;
};

struct AblationInputs {
  const Taxonomy* taxonomy = nullptr;
  /// Builds the level spaces, with or without text preprocessing.
  std::function<PreparedEmbeddings(bool preprocess)> prepare;
  bool can_preprocess = false;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  TruthSets truths;
  TrainConfig train;
  std::size_t k = 10;
  std::size_t final_list_size = 10;
};

/// Cumulative ablation in a fixed row order:
///   zero_shot         flat search, no adapters, raw text
///   +preprocess       same, preprocessed text (when possible and enabled)
///   +trained_adapter  flat search with per-level adapters
///   +group_reasoning  beam search with width k
inline std::vector<EvalRow> ablation_run(const AblationInputs& in,
                                         const AblationStages& stages) {
  std::vector<EvalRow> rows;
  auto spaces = in.prepare(false);
  std::map<int, Adapter> adapters;

  auto score = [&](const std::string& name, SearchMode mode) {
    const auto stores = document_stores(spaces);
    EvalDataset data{in.taxonomy, &stores, make_queries(spaces, in.test_ids),
                     in.truths};
    const auto beam =
        make_beam_config(spaces, adapters, in.k, in.final_list_size);
    std::optional<std::size_t> k;
    if (mode == SearchMode::kGroup) k = in.k;
    rows.push_back({name, k, run_eval(data, beam, mode)});
  };

  score("zero_shot", SearchMode::kFlat);
  if (stages.preprocess && in.can_preprocess) {
    spaces = in.prepare(true);
    score("+preprocess", SearchMode::kFlat);
  }
  if (stages.trained_adapter) {
    for (auto& [level, result] : train_level_adapters(
             *in.taxonomy, spaces, in.train_ids, in.truths, in.train)) {
      adapters.emplace(level, std::move(result.adapter));
    }
    score("+trained_adapter", SearchMode::kFlat);
  }
  if (stages.group_reasoning) score("+group_reasoning", SearchMode::kGroup);
  return rows;
}

/// `config,k,acc1,acc3,acc5,acc10,mean_sims,seconds`. The seconds column is
/// left empty when `with_timing` is false so reruns are byte-identical.
inline std::string eval_csv(std::span<const EvalRow> rows, bool with_timing) {
  std::string out = "config,k,acc1,acc3,acc5,acc10,mean_sims,seconds\n";
  for (const auto& r : rows) {
    out += r.config + ',' + (r.k ? std::to_string(*r.k) : "");
    for (const auto k : kReportedKs) {
      out += ',' + io::format_fixed(r.outcome.acc_at.at(k), 4);
    }
    out += ',' + io::format_fixed(r.outcome.mean_similarity_count, 4) + ',';
    if (with_timing) out += io::format_fixed(r.outcome.seconds, 6);
    out += '\n';
  }
  return out;
}

}  // namespace hsc
