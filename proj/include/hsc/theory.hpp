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

// Numerical checks of the entropy and cost claims for hierarchical
// classification on a uniform tree (branching b, depth d).
//
// Error model: a classifier over K classes with accuracy p puts mass p on
// the true class and spreads 1 - p uniformly over the other K - 1, so
//   H(p, K) = -p log2 p - (1 - p) log2((1 - p) / (K - 1)).
// Hierarchical:  H_G = sum_i H(p_i, b).
// Flat:          H_D = H(prod_i p_i, b^d).

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsc/error.hpp"

namespace hsc::theory {

/// Equality slack used when classifying a cell as a violation.
inline constexpr double kEntropyTolerance = 1e-12;

inline double entropy_single(double p, double classes) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw PreconditionError("entropy_single: p must be in (0, 1]");
  }
  if (!(classes >= 1.0)) {
    throw PreconditionError("entropy_single: K must be >= 1");
  }
  if (p == 1.0) return 0.0;
  if (classes == 1.0) {
    throw PreconditionError("entropy_single: p < 1 needs at least 2 classes");
  }
  const double q = 1.0 - p;
  return -p * std::log2(p) - q * std::log2(q / (classes - 1.0));
}

struct EntropyModel {
  int b = 2;
  int d = 1;
  std::vector<double> p;  // one accuracy per level

  void validate() const {
    if (b < 2) throw PreconditionError("entropy model: b must be >= 2");
    if (d < 1) throw PreconditionError("entropy model: d must be >= 1");
    if (p.size() != static_cast<std::size_t>(d)) {
      throw PreconditionError("entropy model: need one accuracy per level");
    }
    for (double x : p) {
      if (!(x > 0.0 && x <= 1.0)) {
        throw PreconditionError("entropy model: accuracies must be in (0, 1]");
      }
    }
  }

  double flat_accuracy() const {
    return std::accumulate(p.begin(), p.end(), 1.0, std::multiplies<>());
  }

  bool above_chance() const {
    for (double x : p) {
      if (x < 1.0 / b) return false;
    }
    return true;
  }
};

inline double entropy_hierarchical(const EntropyModel& m) {
  m.validate();
  double h = 0.0;
  for (double x : m.p) h += entropy_single(x, m.b);
  return h;
}

inline double entropy_flat(const EntropyModel& m) {
  m.validate();
  return entropy_single(m.flat_accuracy(), std::pow(double(m.b), m.d));
}

// ---------------------------------------------------------------------------
// Cost model: one similarity evaluation per scored class.

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw std::overflow_error("cost overflow: " + std::to_string(a) + " * " +
                              std::to_string(b));
  }
  return a * b;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) {
    throw std::overflow_error("cost overflow in addition");
  }
  return a + b;
}

inline void check_tree_shape(std::uint64_t b, std::uint64_t d) {
  if (b < 2) throw PreconditionError("cost: b must be >= 2");
  if (d < 1) throw PreconditionError("cost: d must be >= 1");
}

/// b^d: one similarity per leaf.
inline std::uint64_t cost_flat(std::uint64_t b, std::uint64_t d) {
  check_tree_shape(b, d);
  std::uint64_t c = 1;
  for (std::uint64_t i = 0; i < d; ++i) c = checked_mul(c, b);
  return c;
}

/// Level 1 scores b children and keeps r_1 = min(k, b). Level i > 1 scores
/// r_{i-1} * b children and keeps r_i = min(k, r_{i-1} * b). Equals b * d
/// for k = 1.
inline std::uint64_t cost_hierarchical(std::uint64_t b, std::uint64_t d,
                                       std::uint64_t k) {
  check_tree_shape(b, d);
  if (k < 1) throw PreconditionError("cost: k must be >= 1");
  std::uint64_t total = b;
  std::uint64_t retained = std::min(k, b);
  for (std::uint64_t level = 2; level <= d; ++level) {
    const auto scored = checked_mul(retained, b);
    total = checked_add(total, scored);
    retained = std::min(k, scored);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Grid check

struct TheoryCell {
  EntropyModel model;
  double h_group = 0.0;
  double h_flat = 0.0;
  std::uint64_t cost_hier = 0;
  std::uint64_t cost_flat = 0;
  bool violation = false;  // h_group > h_flat + kEntropyTolerance
};

struct TheoremReport {
  std::vector<TheoryCell> cells;
  std::vector<std::size_t> violations;  // indices into cells
};

/// Evaluates H_G <= H_D and both cost counts per cell. Cells below chance
/// (some p_i < 1/b) are evaluated too; any violation they show is reported.
inline TheoremReport theorem1_check(const std::vector<EntropyModel>& grid,
                                    std::uint64_t k = 1) {
  TheoremReport report;
  for (const auto& m : grid) {
    m.validate();
    TheoryCell cell;
    cell.model = m;
    cell.h_group = entropy_hierarchical(m);
    cell.h_flat = entropy_flat(m);
    cell.cost_hier = cost_hierarchical(m.b, m.d, k);
    cell.cost_flat = cost_flat(m.b, m.d);
    cell.violation = cell.h_group > cell.h_flat + kEntropyTolerance;
    if (cell.violation) report.violations.push_back(report.cells.size());
    report.cells.push_back(std::move(cell));
  }
  return report;
}

/// b in [2, 10], d in [1, 4], equal per-level p in {0.50, 0.55, ..., 0.95,
/// 0.99}, keeping only p >= 1/b.
inline std::vector<EntropyModel> standard_grid() {
  std::vector<double> ps;
  for (int i = 0; i < 10; ++i) ps.push_back(0.50 + 0.05 * i);
  ps.push_back(0.99);
  std::vector<EntropyModel> grid;
  for (int b = 2; b <= 10; ++b) {
    for (int d = 1; d <= 4; ++d) {
      for (double p : ps) {
        if (p < 1.0 / b) continue;
        grid.push_back({b, d, std::vector<double>(static_cast<std::size_t>(d), p)});
      }
    }
  }
  return grid;
}

}  // namespace hsc::theory
