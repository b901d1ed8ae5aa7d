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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hsc/corpus.hpp"
#include "hsc/evaluation.hpp"
#include "support/synthetic.hpp"

namespace hsc {
namespace {

ClassificationResult ranked(std::string id, std::vector<std::string> leaves) {
  ClassificationResult r;
  r.id = std::move(id);
  double score = 1.0;
  for (auto& leaf : leaves) {
    r.ranked_leaves.push_back({std::move(leaf), score});
    score -= 0.01;
  }
  return r;
}

TEST(AccAtK, HitRanksOneTwoFourNone) {
  const std::vector<ClassificationResult> results{
      ranked("a", {"t", "x", "y", "z"}),
      ranked("b", {"x", "t", "y", "z"}),
      ranked("c", {"x", "y", "z", "t"}),
      ranked("d", {"x", "y", "z", "w"})};
  const TruthSets truths{{"a", {"t"}}, {"b", {"t"}}, {"c", {"t"}}, {"d", {"t"}}};
  const auto out = evaluate(results, truths);
  EXPECT_EQ(out.acc_at.at(1), 25.0);
  EXPECT_EQ(out.acc_at.at(3), 50.0);
  EXPECT_EQ(out.acc_at.at(5), 75.0);
  EXPECT_EQ(out.acc_at.at(10), 75.0);
  EXPECT_EQ(out.hit_ranks,
            (std::vector<std::optional<std::size_t>>{1, 2, 4, std::nullopt}));
}

TEST(AccAtK, AnyTrueLabelCounts) {
  const std::vector<ClassificationResult> results{ranked("a", {"x", "u", "t"})};
  const TruthSets truths{{"a", {"t", "u"}}};
  EXPECT_EQ(acc_at_k(results, truths, 1), 0.0);
  EXPECT_EQ(acc_at_k(results, truths, 2), 100.0);
}

TEST(AccAtK, Errors) {
  const std::vector<ClassificationResult> results{ranked("a", {"x"})};
  EXPECT_THROW(acc_at_k(results, {{"a", {"x"}}}, 0), PreconditionError);
  EXPECT_THROW(acc_at_k({}, {}, 1), PreconditionError);
  EXPECT_THROW(acc_at_k(results, {{"b", {"x"}}}, 1), ValidationError);
}

TEST(AccAtK, MonotoneOnRandomSets) {
  Xorshift64Star rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ClassificationResult> results;
    TruthSets truths;
    const int n = 1 + int(rng.below(20));
    for (int i = 0; i < n; ++i) {
      const auto id = "q" + std::to_string(i);
      std::vector<std::string> leaves;
      for (int j = 0; j < 12; ++j) leaves.push_back("c" + std::to_string(rng.below(30)));
      results.push_back(ranked(id, leaves));
      truths[id] = {"c" + std::to_string(rng.below(30))};
    }
    double previous = 0.0;
    for (std::size_t k = 1; k <= 12; ++k) {
      const double acc = acc_at_k(results, truths, k);
      EXPECT_GE(acc, previous);
      EXPECT_LE(acc, 100.0);
      previous = acc;
    }
  }
}

class SyntheticEval : public ::testing::Test {
 protected:
  SyntheticEval() {
    testing::PipelineParams params;
    params.top = 4;
    params.queries_per_leaf = 2;
    params.nuisance_sigma = 1.2;
    params.seed = 3;
    corpus_ = testing::make_pipeline_corpus(params);
    stores_ = document_stores(corpus_.spaces);
    data_.taxonomy = &corpus_.taxonomy;
    data_.stores = &stores_;
    data_.queries = make_queries(corpus_.spaces, corpus_.query_ids);
    data_.truths = corpus_.truths;
  }

  testing::PipelineCorpus corpus_;
  std::map<std::string, EmbeddingStore> stores_;
  EvalDataset data_;
};

TEST_F(SyntheticEval, SweepIsMonotoneAndExhaustiveMatchesFlat) {
  const auto beam = make_beam_config(corpus_.spaces, {}, 1, 10);
  const std::size_t ks[] = {1, 2, 4, exhaustive_beam_width(corpus_.taxonomy)};
  const auto rows = k_sweep(data_, ks, beam);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].outcome.mean_similarity_count,
              rows[i - 1].outcome.mean_similarity_count);
  }
  EXPECT_EQ(rows[0].outcome.mean_similarity_count, 4.0 + 3.0 + 3.0);

  // The widest frontier: the beam keeps every node.
  const auto flat = run_eval(data_, beam, SearchMode::kFlat);
  EXPECT_EQ(rows[3].outcome.acc_at, flat.acc_at);
  EXPECT_EQ(rows[3].outcome.hit_ranks, flat.hit_ranks);
}

TEST_F(SyntheticEval, CsvWithoutTimingIsDeterministic) {
  const auto beam = make_beam_config(corpus_.spaces, {}, 2, 10);
  const std::size_t ks[] = {1, 3};
  const auto a = eval_csv(k_sweep(data_, ks, beam), false);
  const auto b = eval_csv(k_sweep(data_, ks, beam), false);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "config,k,acc1,acc3,acc5,acc10,mean_sims,seconds");
  const auto second_line = a.substr(a.find('\n') + 1);
  EXPECT_EQ(second_line.substr(0, 8), "group,1,");
  EXPECT_EQ(second_line[second_line.find('\n') - 1], ',');
}

TEST_F(SyntheticEval, AblationRowOrder) {
  AblationInputs in;
  in.taxonomy = &corpus_.taxonomy;
  in.prepare = [&](bool) { return corpus_.spaces; };
  in.can_preprocess = false;
  in.truths = corpus_.truths;
  const auto parts = split(corpus_.query_ids, {0.5, 0.1, 0.4}, 42);
  in.train_ids = parts.ids_in(Partition::kTrain);
  in.test_ids = parts.ids_in(Partition::kTest);
  in.train.epochs = 5;
  in.k = 3;
  const auto rows = ablation_run(in, {});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].config, "zero_shot");
  EXPECT_EQ(rows[1].config, "+trained_adapter");
  EXPECT_EQ(rows[2].config, "+group_reasoning");
  EXPECT_FALSE(rows[1].k);
  EXPECT_EQ(rows[2].k, 3u);

  const auto minimal = ablation_run(in, {false, false, false});
  ASSERT_EQ(minimal.size(), 1u);
  EXPECT_EQ(minimal[0].outcome.acc_at, rows[0].outcome.acc_at);
}

}  // namespace
}  // namespace hsc
