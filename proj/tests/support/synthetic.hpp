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

// Synthetic taxonomies and embeddings for tests. Test-only.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hsc/embedding.hpp"
#include "hsc/pipeline.hpp"
#include "hsc/rng.hpp"
#include "hsc/taxonomy.hpp"

namespace hsc::testing {

inline std::vector<float> random_unit(std::size_t dim, Xorshift64Star& rng) {
  std::vector<float> v(dim);
  double n = 0.0;
  do {
    n = 0.0;
    for (auto& x : v) {
      x = static_cast<float>(rng.normal());
      n += double(x) * x;
    }
  } while (n == 0.0);
  n = std::sqrt(n);
  for (auto& x : v) x = static_cast<float>(x / n);
  return v;
}

/// Tree whose node at depth i has code length i; node codes append one
/// digit per level, so branching must be <= 10. `branching(depth, rng)`
/// picks each internal node's child count. Levels are 1..depth.
template <typename BranchFn>
Taxonomy make_tree(int depth, BranchFn&& branching, Xorshift64Star& rng) {
  std::vector<TaxonomyNode> nodes;
  std::vector<std::string> frontier{""};
  for (int level = 1; level <= depth; ++level) {
    std::vector<std::string> next;
    for (const auto& parent : frontier) {
      const int b = branching(level, rng);
      for (int c = 0; c < b; ++c) {
        TaxonomyNode n;
        n.code = parent + static_cast<char>('0' + c);
        n.level = level;
        n.title = "node " + n.code;
        nodes.push_back(n);
        next.push_back(n.code);
      }
    }
    frontier = std::move(next);
  }
  return Taxonomy::build(std::move(nodes));
}

inline Taxonomy make_uniform_tree(int b, int d) {
  Xorshift64Star unused(0);
  return make_tree(d, [b](int, Xorshift64Star&) { return b; }, unused);
}

/// One store per level ("level<L>") with a random unit vector per node.
inline std::map<std::string, EmbeddingStore> random_level_stores(
    const Taxonomy& tax, std::size_t dim, Xorshift64Star& rng) {
  std::map<std::string, EmbeddingStore> out;
  for (int level : tax.levels()) {
    EmbeddingStore store(level_namespace(level), dim);
    for (const auto& code : tax.codes_at_level(level)) {
      store.add(code, random_unit(dim, rng));
    }
    out.emplace(store.name_space(), std::move(store));
  }
  return out;
}

inline BeamConfig plain_beam(const Taxonomy& tax, std::size_t k,
                             std::size_t final_list_size) {
  BeamConfig config;
  config.k = k;
  config.final_list_size = final_list_size;
  for (int level : tax.levels()) {
    config.levels.emplace(level, LevelBinding{level_namespace(level), {}});
  }
  return config;
}

/// Three-level corpus for end-to-end training runs.
///
/// Taxonomy: `top` level-2 codes "10".., each with `fan` level-3 children,
/// each with `fan` level-6 children (NAICS-like code lengths 2/3/6).
/// Class vectors are a unit vector over the first `signal_dims` components
/// plus N(0, class_nuisance_sigma) on the rest. Every query is, per level, a
/// copy of its ancestor's class vector plus Gaussian noise: `signal_sigma`
/// on signal components and `nuisance_sigma` on the rest. Noise in the
/// nuisance block scrambles cosine rankings; a trained adapter can learn to
/// suppress that block.
struct PipelineCorpus {
  Taxonomy taxonomy;
  PreparedEmbeddings spaces;
  std::vector<std::string> query_ids;
  TruthSets truths;
};

struct PipelineParams {
  int top = 20;
  int fan = 3;
  int queries_per_leaf = 5;
  std::size_t dim = 32;
  std::size_t signal_dims = 16;
  double signal_sigma = 0.05;
  double nuisance_sigma = 0.5;
  double class_nuisance_sigma = 0.25;
  std::uint64_t seed = 1;
};

inline PipelineCorpus make_pipeline_corpus(const PipelineParams& p) {
  Xorshift64Star rng(p.seed);
  std::vector<TaxonomyNode> nodes;
  for (int a = 0; a < p.top; ++a) {
    const auto c2 = std::to_string(10 + a);
    nodes.push_back({c2, 2, "sector " + c2, "", std::nullopt});
    for (int b = 0; b < p.fan; ++b) {
      const auto c3 = c2 + std::to_string(b);
      nodes.push_back({c3, 3, "subsector " + c3, "", std::nullopt});
      for (int c = 0; c < p.fan; ++c) {
        const auto c6 = c3 + "00" + std::to_string(c);
        nodes.push_back({c6, 6, "industry " + c6, "", std::nullopt});
      }
    }
  }
  PipelineCorpus out;
  out.taxonomy = Taxonomy::build(std::move(nodes));
  const auto& tax = out.taxonomy;

  auto class_vector = [&] {
    auto signal = random_unit(p.signal_dims, rng);
    std::vector<float> v(p.dim, 0.0f);
    std::copy(signal.begin(), signal.end(), v.begin());
    for (std::size_t t = p.signal_dims; t < p.dim; ++t) {
      v[t] = static_cast<float>(p.class_nuisance_sigma * rng.normal());
    }
    return v;
  };
  for (int level : tax.levels()) {
    LevelSpace space{EmbeddingStore(level_namespace(level), p.dim),
                     EmbeddingStore("queries", p.dim)};
    for (const auto& code : tax.codes_at_level(level)) {
      space.documents.add(code, class_vector());
    }
    out.spaces.emplace(level, std::move(space));
  }

  int serial = 0;
  for (const auto& leaf : tax.codes_at_level(6)) {
    for (int i = 0; i < p.queries_per_leaf; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "q%05d", serial++);
      out.query_ids.push_back(id);
      out.truths[id] = {leaf};
      for (auto& [level, space] : out.spaces) {
        const auto anchor = space.documents.at(*tax.ancestor_at_level(leaf, level));
        std::vector<float> q(anchor.begin(), anchor.end());
        for (std::size_t t = 0; t < p.dim; ++t) {
          const double sigma =
              t < p.signal_dims ? p.signal_sigma : p.nuisance_sigma;
          q[t] += static_cast<float>(sigma * rng.normal());
        }
        space.queries.add(id, q);
      }
    }
  }
  return out;
}

}  // namespace hsc::testing
