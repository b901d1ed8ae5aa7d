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

// Prefix-coded industry taxonomy (NAICS style). Levels are whatever the
// file declares, e.g. {2, 3, 6}; depth is the number of distinct levels.
//
// Parent resolution for a node:
//   1. an explicit "parent" field wins;
//   2. nodes at the smallest level hang off the synthetic root;
//   3. otherwise the longest strictly shorter code that prefixes this one.
// Range sectors such as "31-33" cannot be found by rule 3, so their children
// must name them explicitly.

#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsc/error.hpp"
#include "hsc/io.hpp"

namespace hsc {

struct TaxonomyNode {
  std::string code;
  int level = 0;
  std::string title;
  std::string description;
  std::optional<std::string> parent_code;  // as declared, not as resolved

  friend bool operator==(const TaxonomyNode&, const TaxonomyNode&) = default;
};

class Taxonomy {
 public:
  /// Code of the synthetic root. Never a valid record code.
  static constexpr std::string_view kRoot{};

  Taxonomy() = default;

  /// Validates and indexes `nodes`. `line_numbers`, when given, is parallel
  /// to `nodes` and only used in error messages.
  static Taxonomy build(std::vector<TaxonomyNode> nodes,
                        std::span<const std::size_t> line_numbers = {}) {
    Taxonomy tax;
    auto where = [&](std::size_t i) {
      return line_numbers.empty()
                 ? "record " + std::to_string(i + 1)
                 : "line " + std::to_string(line_numbers[i]);
    };

    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].code.empty()) {
        throw ValidationError(where(i) + ": empty code");
      }
      auto [it, inserted] = tax.index_.emplace(nodes[i].code, i);
      if (!inserted) {
        throw ValidationError(where(i) + ": duplicate code '" +
                              nodes[i].code + "' (first at " +
                              where(it->second) + ")");
      }
    }
    tax.nodes_ = std::move(nodes);

    for (const auto& n : tax.nodes_) tax.levels_.push_back(n.level);
    std::sort(tax.levels_.begin(), tax.levels_.end());
    tax.levels_.erase(std::unique(tax.levels_.begin(), tax.levels_.end()),
                      tax.levels_.end());

    tax.parent_.resize(tax.nodes_.size());
    tax.children_.emplace(std::string(kRoot), std::vector<std::string>{});
    for (const auto& n : tax.nodes_) tax.children_[n.code];

    for (std::size_t i = 0; i < tax.nodes_.size(); ++i) {
      const auto& n = tax.nodes_[i];
      std::string parent;
      if (n.parent_code) {
        if (!tax.index_.contains(*n.parent_code)) {
          throw ValidationError(where(i) + ": orphan node '" + n.code +
                                "': declared parent '" + *n.parent_code +
                                "' does not exist");
        }
        parent = *n.parent_code;
      } else if (n.level != tax.levels_.front()) {
        bool found = false;
        for (std::size_t len = n.code.size() - 1; len > 0; --len) {
          const auto prefix = n.code.substr(0, len);
          if (tax.index_.contains(prefix)) {
            parent = prefix;
            found = true;
            break;
          }
        }
        if (!found) {
          throw ValidationError(where(i) + ": orphan node '" + n.code +
                                "': no parent resolvable by prefix");
        }
      }
      if (!parent.empty()) {
        const auto& p = tax.nodes_[tax.index_.at(parent)];
        if (p.level >= n.level) {
          throw ValidationError(
              where(i) + ": level " + std::to_string(n.level) + " of '" +
              n.code + "' does not exceed level " + std::to_string(p.level) +
              " of its parent '" + parent + "'");
        }
      }
      tax.parent_[i] = parent;
      tax.children_[parent].push_back(n.code);
    }
    for (auto& [code, kids] : tax.children_) {
      std::sort(kids.begin(), kids.end());
    }
    return tax;
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(std::string_view code) const {
    return index_.contains(std::string(code));
  }

  /// Declared levels, ascending.
  const std::vector<int>& levels() const noexcept { return levels_; }
  std::size_t depth() const noexcept { return levels_.size(); }

  std::size_t level_position(int level) const {
    const auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
    if (it == levels_.end() || *it != level) {
      throw ValidationError("level " + std::to_string(level) +
                            " is not declared in the taxonomy");
    }
    return static_cast<std::size_t>(it - levels_.begin());
  }

  const TaxonomyNode& node(std::string_view code) const {
    return nodes_[checked_index(code)];
  }

  /// All nodes in file order.
  const std::vector<TaxonomyNode>& nodes() const noexcept { return nodes_; }

  /// Resolved parent code; kRoot for top-level nodes.
  const std::string& parent(std::string_view code) const {
    return parent_[checked_index(code)];
  }

  /// Child codes sorted ascending. Accepts kRoot.
  std::span<const std::string> child_codes(std::string_view code) const {
    const auto it = children_.find(std::string(code));
    if (it == children_.end()) {
      throw ValidationError("unknown taxonomy code '" + std::string(code) +
                            "'");
    }
    return it->second;
  }

  std::vector<const TaxonomyNode*> children(std::string_view code) const {
    std::vector<const TaxonomyNode*> out;
    for (const auto& c : child_codes(code)) out.push_back(&node(c));
    return out;
  }

  bool is_leaf(std::string_view code) const {
    return child_codes(code).empty();
  }

  /// The node itself followed by its ancestors, ending at a child of root.
  std::vector<std::string> path_to_root(std::string_view code) const {
    std::vector<std::string> out;
    std::string current(code);
    checked_index(current);
    while (!current.empty()) {
      out.push_back(current);
      current = parent(current);
    }
    return out;
  }

  /// Ancestor (or self) of `code` at `level`, if the chain passes through it.
  std::optional<std::string> ancestor_at_level(std::string_view code,
                                               int level) const {
    for (auto& c : path_to_root(code)) {
      if (node(c).level == level) return c;
    }
    return std::nullopt;
  }

  /// Codes at `level`, ascending.
  std::vector<std::string> codes_at_level(int level) const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
      if (n.level == level) out.push_back(n.code);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Nodes without children, ascending.
  std::vector<std::string> leaves() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
      if (is_leaf(n.code)) out.push_back(n.code);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t checked_index(std::string_view code) const {
    const auto it = index_.find(std::string(code));
    if (it == index_.end()) {
      throw ValidationError("unknown taxonomy code '" + std::string(code) +
                            "'");
    }
    return it->second;
  }

  std::vector<TaxonomyNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> parent_;
  std::map<std::string, std::vector<std::string>> children_;
  std::vector<int> levels_;
};

/// One JSON object per line:
/// {"code": "...", "level": n, "title": "...", "description": "...",
///  "parent": "..."?}. Blank lines and lines starting with '#' are skipped.
inline Taxonomy parse_taxonomy(std::istream& in) {
  std::vector<TaxonomyNode> nodes;
  std::vector<std::size_t> lines;
  io::for_each_record_line(in, [&](std::string_view text, std::size_t line) {
    auto fail = [&](const std::string& why) {
      throw ValidationError("taxonomy line " + std::to_string(line) + ": " +
                            why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail("record is not a JSON object");
    TaxonomyNode n;
    try {
      n.code = j.at("code").get<std::string>();
      n.level = j.at("level").get<int>();
      n.title = j.value("title", std::string{});
      n.description = j.value("description", std::string{});
      if (j.contains("parent") && !j.at("parent").is_null()) {
        n.parent_code = j.at("parent").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("bad field: ") + e.what());
    }
    if (n.code.empty()) fail("empty code");
    nodes.push_back(std::move(n));
    lines.push_back(line);
  });
  return Taxonomy::build(std::move(nodes), lines);
}

inline void serialize_taxonomy(const Taxonomy& tax, std::ostream& out) {
  for (const auto& n : tax.nodes()) {
    nlohmann::ordered_json j;
    j["code"] = n.code;
    j["level"] = n.level;
    j["title"] = n.title;
    j["description"] = n.description;
    if (n.parent_code) j["parent"] = *n.parent_code;
    out << j.dump() << '\n';
  }
}

}  // namespace hsc
