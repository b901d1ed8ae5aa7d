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

// Classify a few company descriptions against a small sector tree with the
// built-in hashing encoder, by beam search and by flat search.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hsc/hsc.hpp"

int main() {
  std::istringstream taxonomy_jsonl(R"(
{"code": "31", "level": 2, "title": "Food and leather manufacturing", "description": "bakery bread fruit shoes sneakers"}
{"code": "311", "level": 3, "title": "Food manufacturing", "description": "bakery canning oilseed"}
{"code": "311811", "level": 6, "title": "Retail bakeries", "description": "bread cakes pastries"}
{"code": "311421", "level": 6, "title": "Fruit canning", "description": "jams fruit preserves"}
{"code": "316", "level": 3, "title": "Leather goods", "description": "footwear shoes leather"}
{"code": "316210", "level": 6, "title": "Footwear manufacturing", "description": "athletic shoes sneakers"}
{"code": "48", "level": 2, "title": "Transportation", "description": "airline passenger flights cargo"}
{"code": "481", "level": 3, "title": "Air transportation", "description": "airline flights"}
{"code": "481111", "level": 6, "title": "Scheduled passenger air", "description": "airline passenger flights routes"}
{"code": "481112", "level": 6, "title": "Scheduled freight air", "description": "air cargo freight flights"}
)");
  const auto tax = hsc::parse_taxonomy(taxonomy_jsonl);

  const std::vector<hsc::EnterpriseRecord> companies{
      {"a", "Crumb & Co", "bakery selling bread and pastries", {}, {}, {}},
      {"b", "SkyLine", "passenger airline with domestic flights", {}, {}, {}},
      {"c", "Stride", "designs sneakers and athletic shoes", {}, {}, {}}};

  const hsc::HashingEncoder encoder(128);
  const auto spaces = hsc::encode_corpus(
      tax, companies,
      [&](std::span<const std::string> texts) { return encoder.encode(texts); });
  const auto stores = hsc::document_stores(spaces);
  const hsc::HierarchicalIndex index(
      tax, stores, hsc::make_beam_config(spaces, {}, /*k=*/1, /*final=*/3));

  const std::vector<std::string> ids{"a", "b", "c"};
  const auto queries = hsc::make_queries(spaces, ids);
  for (const auto mode : {hsc::SearchMode::kGroup, hsc::SearchMode::kFlat}) {
    std::cout << (mode == hsc::SearchMode::kGroup ? "beam k=1" : "flat") << '\n';
    const auto batch = hsc::classify_batch(queries, index, mode);
    for (const auto& r : batch.results) {
      std::cout << "  " << r.id << " -> " << r.best() << " ("
                << tax.node(r.best()).title << "), " << r.similarity_count
                << " similarities\n";
    }
  }
  return 0;
}
