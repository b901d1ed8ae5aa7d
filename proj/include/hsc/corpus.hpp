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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsc/error.hpp"
#include "hsc/io.hpp"
#include "hsc/rng.hpp"
#include "hsc/taxonomy.hpp"

namespace hsc {

struct EnterpriseRecord {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> naics_codes;
  std::optional<double> revenue_busd;
  std::optional<double> reported_emissions_mt;
};

/// One JSON object per line:
/// {"id", "name", "description", "naics"?: [...], "revenue_busd"?: f,
///  "reported_emissions_mt"?: f}. Output order is input order.
inline std::vector<EnterpriseRecord> load_enterprises(std::istream& in) {
  std::vector<EnterpriseRecord> out;
  std::unordered_map<std::string, std::size_t> first_line;
  io::for_each_record_line(in, [&](std::string_view text, std::size_t line) {
    auto fail = [&](const std::string& why) {
      throw ValidationError("enterprise line " + std::to_string(line) + ": " +
                            why);
    };
    EnterpriseRecord r;
    try {
      const auto j = nlohmann::json::parse(text);
      r.id = j.at("id").get<std::string>();
      r.name = j.value("name", std::string{});
      r.description = j.at("description").get<std::string>();
      if (j.contains("naics") && !j["naics"].is_null()) {
        r.naics_codes = j["naics"].get<std::vector<std::string>>();
      }
      if (j.contains("revenue_busd") && !j["revenue_busd"].is_null()) {
        r.revenue_busd = j["revenue_busd"].get<double>();
      }
      if (j.contains("reported_emissions_mt") &&
          !j["reported_emissions_mt"].is_null()) {
        r.reported_emissions_mt = j["reported_emissions_mt"].get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed record: ") + e.what());
    }
    if (r.id.empty()) fail("empty id");
    if (io::trim(r.description).empty()) {
      fail("empty description for '" + r.id + "'");
    }
    const auto [it, inserted] = first_line.emplace(r.id, line);
    if (!inserted) {
      fail("duplicate id '" + r.id + "' (first seen on line " +
           std::to_string(it->second) + ")");
    }
    out.push_back(std::move(r));
  });
  return out;
}

/// Throws if any ground-truth label is missing from `tax`.
inline void check_labels(std::span<const EnterpriseRecord> records,
                         const Taxonomy& tax) {
  for (const auto& r : records) {
    for (const auto& code : r.naics_codes) {
      if (!tax.contains(code)) {
        throw ValidationError("enterprise '" + r.id + "': unknown label '" +
                              code + "'");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Preprocessing

struct PreprocessConfig {
  std::unordered_set<std::string> stopwords;
};

struct PreprocessStats {
  std::size_t empty_outputs = 0;
};

/// One token per line; blank lines and '#' comments skipped. Tokens are
/// lowercased so they match preprocessed text.
inline std::unordered_set<std::string> load_stopwords(std::istream& in) {
  std::unordered_set<std::string> out;
  io::for_each_record_line(in, [&](std::string_view w, std::size_t) {
    std::string s(w);
    for (auto& c : s) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    out.insert(std::move(s));
  });
  return out;
}

/// Lowercases ASCII, maps ASCII punctuation to spaces, collapses whitespace
/// and drops stopword tokens. Bytes >= 0x80 pass through untouched.
/// Idempotent.
inline std::string preprocess(std::string_view text,
                              const PreprocessConfig& config,
                              PreprocessStats* stats = nullptr) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && (std::ispunct(c) || std::isspace(c))) {
      cleaned.push_back(' ');
    } else if (c < 0x80) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else {
      cleaned.push_back(ch);
    }
  }
  std::string out;
  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    const auto start = cleaned.find_first_not_of(' ', pos);
    if (start == std::string::npos) break;
    auto end = cleaned.find(' ', start);
    if (end == std::string::npos) end = cleaned.size();
    const auto token = cleaned.substr(start, end - start);
    if (!config.stopwords.contains(token)) {
      if (!out.empty()) out.push_back(' ');
      out += token;
    }
    pos = end;
  }
  if (out.empty() && stats != nullptr) ++stats->empty_outputs;
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation

/// Replaces each whitespace token with probability p by a word drawn
/// uniformly from `vocabulary`. Tokens are re-joined with single spaces, so
/// the token count is preserved. One uniform() draw decides each token and,
/// on replacement, one below() draw picks the word.
inline std::string augment_random_replace(
    std::string_view text, double p, std::span<const std::string> vocabulary,
    std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw PreconditionError("augment_random_replace: p must be in [0, 1]");
  }
  if (p > 0.0 && vocabulary.empty()) {
    throw PreconditionError(
        "augment_random_replace: empty vocabulary with p > 0");
  }
  if (p == 0.0) return std::string(text);

  Xorshift64Star rng(seed);
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of(" \t\r\n", pos);
    if (start == std::string_view::npos) break;
    auto end = text.find_first_of(" \t\r\n", start);
    if (end == std::string_view::npos) end = text.size();
    if (!out.empty()) out.push_back(' ');
    if (rng.uniform() < p) {
      out += vocabulary[rng.below(vocabulary.size())];
    } else {
      out += text.substr(start, end - start);
    }
    pos = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

enum class Partition { kTrain, kValidation, kTest };

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::kTrain:
      return "train";
    case Partition::kValidation:
      return "validation";
    case Partition::kTest:
      return "test";
  }
  return "?";
}

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct SplitAssignment {
  std::map<std::string, Partition> assignment;
  std::uint64_t seed = 0;
  SplitRatios ratios;

  std::vector<std::string> ids_in(Partition p) const {
    std::vector<std::string> out;
    for (const auto& [id, part] : assignment) {
      if (part == p) out.push_back(id);
    }
    return out;
  }

  std::size_t count(Partition p) const {
    return static_cast<std::size_t>(std::count_if(
        assignment.begin(), assignment.end(),
        [p](const auto& kv) { return kv.second == p; }));
  }
};

/// Sorts ids, shuffles them with Xorshift64Star(seed) and cuts
/// [train | validation | test] with validation = floor(N * r_val) and
/// test = floor(N * r_test); train takes the remainder.
inline SplitAssignment split(std::vector<std::string> ids, SplitRatios ratios,
                             std::uint64_t seed) {
  if (ids.empty()) throw PreconditionError("split: empty id list");
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw PreconditionError(
        "split: ratios must be positive and sum to 1 within 1e-9");
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw PreconditionError("split: duplicate ids");
  }
  Xorshift64Star rng(seed);
  shuffle(std::span<std::string>(ids), rng);

  const auto n = static_cast<double>(ids.size());
  const auto n_val = static_cast<std::size_t>(std::floor(n * ratios.validation));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios.test));
  const auto n_train = ids.size() - n_val - n_test;

  SplitAssignment out;
  out.seed = seed;
  out.ratios = ratios;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto part = i < n_train            ? Partition::kTrain
                      : i < n_train + n_val ? Partition::kValidation
                                            : Partition::kTest;
    out.assignment.emplace(ids[i], part);
  }
  return out;
}

}  // namespace hsc
