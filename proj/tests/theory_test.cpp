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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "hsc/theory.hpp"

namespace hsc::theory {
namespace {

// Frozen from an independent mpmath evaluation of the entropy formula.
constexpr double kH_09_10 = 0.7859880937335123;
constexpr double kTwoH_099_2 = 0.16158627179182247;
constexpr double kH_09801_4 = 0.17241945668493122;

TEST(Entropy, FrozenValues) {
  EXPECT_NEAR(entropy_single(0.9, 10), kH_09_10, 1e-13);
  EXPECT_NEAR(entropy_hierarchical({2, 2, {0.99, 0.99}}), kTwoH_099_2, 1e-13);
  EXPECT_NEAR(entropy_flat({2, 2, {0.99, 0.99}}), kH_09801_4, 1e-13);
}

TEST(Entropy, Edges) {
  EXPECT_EQ(entropy_single(1.0, 7), 0.0);
  EXPECT_NEAR(entropy_single(0.5, 2), 1.0, 1e-15);
  EXPECT_NEAR(entropy_single(0.25, 4), 2.0, 1e-15);
  EXPECT_THROW(entropy_single(0.0, 4), PreconditionError);
  EXPECT_THROW(entropy_single(1.5, 4), PreconditionError);
  EXPECT_THROW(entropy_single(0.5, 1), PreconditionError);
  EXPECT_THROW(entropy_single(std::nan(""), 4), PreconditionError);
  EXPECT_THROW(entropy_hierarchical({2, 2, {0.9}}), PreconditionError);
  EXPECT_THROW(entropy_hierarchical({1, 1, {0.9}}), PreconditionError);
}

TEST(Entropy, DecreasesAboveChance) {
  for (int k : {2, 5, 10, 1000}) {
    double previous = entropy_single(1.0 / k, k);
    EXPECT_NEAR(previous, std::log2(double(k)), 1e-12);
    for (double p = 1.0 / k + 0.01; p <= 1.0; p += 0.01) {
      const double h = entropy_single(p, k);
      EXPECT_LT(h, previous + 1e-15);
      previous = h;
    }
  }
}

TEST(EntropyBound, StandardGridHasNoViolations) {
  const auto grid = standard_grid();
  ASSERT_FALSE(grid.empty());
  const auto report = theorem1_check(grid);
  EXPECT_TRUE(report.violations.empty());
  for (const auto& cell : report.cells) {
    EXPECT_LE(cell.h_group, cell.h_flat + kEntropyTolerance);
  }
}

TEST(EntropyBound, EqualityAtChance) {
  for (int b = 2; b <= 10; ++b) {
    for (int d = 1; d <= 4; ++d) {
      const EntropyModel m{b, d, std::vector<double>(d, 1.0 / b)};
      EXPECT_NEAR(entropy_hierarchical(m), entropy_flat(m), 1e-12);
    }
  }
}

TEST(EntropyBound, DepthOneIsEquality) {
  for (double p : {0.3, 0.6, 0.99}) {
    const EntropyModel m{4, 1, {p}};
    EXPECT_DOUBLE_EQ(entropy_hierarchical(m), entropy_flat(m));
  }
}

TEST(EntropyBound, HoldsBelowChanceAndForMixedAccuracies) {
  std::vector<EntropyModel> grid;
  for (int b = 2; b <= 6; ++b) {
    for (int i = 1; i < 20; ++i) {
      for (int j = 1; j <= 20; ++j) {
        grid.push_back({b, 2, {i / 20.0, j / 20.0}});
        grid.push_back({b, 3, {i / 20.0, j / 20.0, 0.5}});
      }
    }
  }
  const auto report = theorem1_check(grid);
  EXPECT_EQ(report.cells.size(), grid.size());
  EXPECT_FALSE(report.cells.front().model.above_chance());
  EXPECT_TRUE(report.violations.empty());
}

TEST(Cost, Examples) {
  EXPECT_EQ(cost_hierarchical(10, 3, 1), 30u);
  EXPECT_EQ(cost_flat(10, 3), 1000u);
  EXPECT_EQ(cost_hierarchical(3, 2, 2), 3u + 6u);
  EXPECT_EQ(cost_hierarchical(2, 1, 5), 2u);
  for (std::uint64_t b = 2; b <= 8; ++b) {
    for (std::uint64_t d = 1; d <= 5; ++d) {
      EXPECT_EQ(cost_hierarchical(b, d, 1), b * d);
    }
  }
}

TEST(Cost, WideBeamScoresEveryNode) {
  for (std::uint64_t b = 2; b <= 6; ++b) {
    for (std::uint64_t d = 1; d <= 4; ++d) {
      std::uint64_t all = 0, level = 1;
      for (std::uint64_t i = 0; i < d; ++i) all += (level *= b);
      std::uint64_t wide = 1;
      for (std::uint64_t i = 1; i < d; ++i) wide *= b;
      EXPECT_EQ(cost_hierarchical(b, d, wide), all);
      EXPECT_EQ(cost_hierarchical(b, d, wide * 10), all);
    }
  }
}

TEST(Cost, MonotoneInK) {
  for (std::uint64_t b = 2; b <= 6; ++b) {
    for (std::uint64_t d = 1; d <= 4; ++d) {
      for (std::uint64_t k = 1; k < 50; ++k) {
        EXPECT_LE(cost_hierarchical(b, d, k), cost_hierarchical(b, d, k + 1));
      }
    }
  }
}

TEST(Cost, BeatsFlatForSmallBeams) {
  // Sufficient condition for the hierarchical count to stay below b^d:
  // k * b * d <= b^d.
  for (std::uint64_t b = 2; b <= 10; ++b) {
    for (std::uint64_t d = 2; d <= 5; ++d) {
      const auto flat = cost_flat(b, d);
      for (std::uint64_t k = 1; k * b * d <= flat && k < 200; ++k) {
        EXPECT_LE(cost_hierarchical(b, d, k), flat);
      }
    }
  }
}

TEST(Cost, OverflowIsReported) {
  EXPECT_THROW(cost_flat(10, 20), std::overflow_error);
  EXPECT_THROW(cost_hierarchical(1000000, 4, std::numeric_limits<std::uint64_t>::max()),
               std::overflow_error);
  EXPECT_EQ(cost_flat(2, 63), std::uint64_t{1} << 63);
  EXPECT_THROW(cost_flat(1, 3), PreconditionError);
  EXPECT_THROW(cost_hierarchical(3, 0, 1), PreconditionError);
  EXPECT_THROW(cost_hierarchical(3, 2, 0), PreconditionError);
}

}  // namespace
}  // namespace hsc::theory
