/*
 * Copyright 2026 The HEC Ensemble Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hec/aggregation.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "hec/errors.hpp"
#include "test_util.hpp"

namespace hec {
namespace {

using test::MakeBundle;
using test::MakeMatrix;

constexpr auto kLex = LearnerCategory::kLexicon;
constexpr auto kBow = LearnerCategory::kBow;
constexpr auto kEmb = LearnerCategory::kEmbeddingNn;
constexpr auto kTr = LearnerCategory::kTransformer;

TEST(ClassWeights, Examples) {
  auto w = ClassWeights({{kLex, 0.5}, {kTr, 0.5}});
  EXPECT_DOUBLE_EQ(w[kLex], 0.5);
  EXPECT_DOUBLE_EQ(w[kTr], 0.5);
  w = ClassWeights({{kBow, 0.8}, {kLex, 0.2}});
  EXPECT_DOUBLE_EQ(w[kBow], 0.8);
  EXPECT_DOUBLE_EQ(w[kLex], 0.2);
  w = ClassWeights({{kTr, 0.93}});
  EXPECT_DOUBLE_EQ(w[kTr], 1.0);
}

TEST(ClassWeights, Errors) {
  EXPECT_THROW(ClassWeights({}), InputError);
  EXPECT_THROW(ClassWeights({{kBow, 0.0}, {kLex, 0.0}}), InputError);
  EXPECT_THROW(ClassWeights({{kBow, 1.5}}), InputError);
}

TEST(LearnerWeights, Examples) {
  const std::vector<AccuracyEntry> one = {{"a", 0.7, kBow}};
  EXPECT_DOUBLE_EQ(LearnerWeights(one).entries.at("a"), 1.0);

  // W = {0.6, 0.4}; u = {0.54, 0.24}; normalised {0.54, 0.24} / 0.78.
  const std::vector<AccuracyEntry> two = {{"a", 0.9, kTr}, {"b", 0.6, kBow}};
  const auto w = LearnerWeights(two);
  EXPECT_NEAR(w.entries.at("a"), 0.54 / 0.78, 1e-12);
  EXPECT_NEAR(w.entries.at("b"), 0.24 / 0.78, 1e-12);
  EXPECT_NEAR(w.entries.at("a"), 0.6923076923, 1e-9);

  const std::vector<AccuracyEntry> four = {
      {"a", 0.8, kLex}, {"b", 0.8, kBow}, {"c", 0.8, kEmb}, {"d", 0.8, kTr}};
  for (const auto& [id, weight] : LearnerWeights(four).entries) {
    EXPECT_DOUBLE_EQ(weight, 0.25) << id;
  }
}

TEST(LearnerWeights, PerCategoryNormalisation) {
  const std::vector<AccuracyEntry> l = {
      {"a", 0.9, kTr}, {"b", 0.7, kTr}, {"c", 0.6, kBow}};
  const auto w = LearnerWeights(l, WmvNormalization::kPerCategory);
  EXPECT_NEAR(w.entries.at("a") + w.entries.at("b"), 1.0, 1e-12);
  EXPECT_NEAR(w.entries.at("c"), 1.0, 1e-12);
  EXPECT_NEAR(w.entries.at("a"), 0.9 / 1.6, 1e-12);
}

TEST(LearnerWeights, Errors) {
  EXPECT_THROW(LearnerWeights(std::vector<AccuracyEntry>{}), InputError);
  const std::vector<AccuracyEntry> zeros = {{"a", 0.0, kBow}, {"b", 0.0, kTr}};
  EXPECT_THROW(LearnerWeights(zeros), InputError);
  EXPECT_THROW(LearnerWeights(zeros, WmvNormalization::kPerCategory), InputError);
  const std::vector<AccuracyEntry> dup = {{"a", 0.5, kBow}, {"a", 0.6, kTr}};
  EXPECT_THROW(LearnerWeights(dup), InputError);
}

TEST(LearnerWeights, SumToOneAndScaleInvariant) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> acc(0.05, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 0.99);
  static constexpr LearnerCategory kCats[] = {kLex, kBow, kEmb, kTr};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AccuracyEntry> l;
    const int n = 1 + trial % 12;
    for (int i = 0; i < n; ++i) {
      l.push_back({"l" + std::to_string(i), acc(gen), kCats[gen() % 4]});
    }
    const auto w = LearnerWeights(l);
    EXPECT_NEAR(w.Total(), 1.0, 1e-9);
    const double c = scale(gen);
    auto scaled = l;
    for (auto& e : scaled) e.accuracy *= c;
    const auto ws = LearnerWeights(scaled);
    for (const auto& [id, weight] : w.entries) {
      EXPECT_NEAR(ws.entries.at(id), weight, 1e-12);
    }
  }
}

TEST(WeightedVote, Examples) {
  WeightedRule r{{{{"a", 0.7}, {"b", 0.3}}}};
  EXPECT_EQ(WeightedVote(r, {{"a", 1}, {"b", 0}}, 2), 1u);
  EXPECT_EQ(WeightedVote(MajorityRule{}, {{"a", 0}, {"b", 0}, {"c", 1}}, 2), 0u);
  EXPECT_EQ(WeightedVote(MajorityRule{}, {{"a", 0}, {"b", 1}}, 2), 0u);
  EXPECT_EQ(WeightedVote(MajorityRule{}, {{"a", 2}, {"b", 1}}, 3), 1u);
  EXPECT_THROW(WeightedVote(MajorityRule{}, {{"a", 2}}, 2), InputError);
  // Rule that does not cover the voters.
  EXPECT_THROW(WeightedVote(r, {{"a", 1}, {"z", 0}}, 2), InputError);
}

TEST(WeightedVote, InvariantUnderPositiveRescaling) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    WeightedRule rule;
    std::map<std::string, Label> votes;
    const int n = 1 + trial % 9;
    for (int i = 0; i < n; ++i) {
      const std::string id = "l" + std::to_string(i);
      rule.weights.entries[id] = w(gen);
      votes[id] = static_cast<Label>(gen() % 4);
    }
    const Label base = WeightedVote(rule, votes, 4);
    for (const double c : {1e-3, 0.37, 3.0, 1e4}) {
      WeightedRule scaled = rule;
      for (auto& [id, x] : scaled.weights.entries) x *= c;
      EXPECT_EQ(WeightedVote(scaled, votes, 4), base);
    }
  }
}

TEST(EvaluateEnsemble, Examples) {
  const std::vector<Label> gold = {0, 1, 1, 0};
  // Row votes: (0,0,1)->0 ok, (1,0,1)->1 ok, (0,0,1)->0 wrong, (0,1,0)->0 ok.
  const auto bundle = MakeBundle(2, gold,
                                 {{"a", kBow, {0, 1, 0, 0}},
                                  {"b", kBow, {0, 0, 0, 1}},
                                  {"c", kTr, {1, 1, 1, 0}},
                                  {"p", kTr, gold}});
  const std::vector<std::string> abc = {"a", "b", "c"};
  EXPECT_DOUBLE_EQ(EvaluateEnsemble(bundle.validation(), abc, MajorityRule{}), 0.75);
  const std::vector<std::string> p = {"p"};
  EXPECT_EQ(EvaluateEnsemble(bundle.validation(), p, MajorityRule{}), 1.0);
  EXPECT_EQ(EvaluateEnsemble(bundle.validation(), {}, MajorityRule{}), 0.0);
  const std::vector<std::string> unknown = {"a", "zz"};
  EXPECT_THROW(EvaluateEnsemble(bundle.validation(), unknown, MajorityRule{}),
               InputError);
  const std::vector<std::string> dup = {"a", "a"};
  EXPECT_THROW(EvaluateEnsemble(bundle.validation(), dup, MajorityRule{}),
               InputError);
}

TEST(EvaluateEnsemble, MemberOrderDoesNotMatter) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(21, 9, 800, 3, true));
  std::vector<std::string> ids = bundle.validation().learner_ids();
  const auto rule = WeightedRule{LearnerWeights(MemberAccuracies(bundle, ids))};
  const double base = EvaluateEnsemble(bundle.validation(), ids, rule);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(ids.begin(), ids.end(), gen);
    EXPECT_EQ(EvaluateEnsemble(bundle.validation(), ids, rule), base);
  }
}

TEST(Wmv, DegeneratesToMajorityWithEqualAccuracies) {
  // Every learner exactly 15/20 correct, spread over all categories.
  std::mt19937_64 gen(3);
  const int rows = 20;
  std::vector<Label> gold(rows);
  for (auto& g : gold) g = static_cast<Label>(gen() % 3);
  static constexpr LearnerCategory kCats[] = {kLex, kBow, kEmb, kTr};
  std::vector<test::Column> cols;
  for (int j = 0; j < 8; ++j) {
    std::vector<Label> col = gold;
    std::vector<int> rows_idx(rows);
    std::iota(rows_idx.begin(), rows_idx.end(), 0);
    std::shuffle(rows_idx.begin(), rows_idx.end(), gen);
    for (int k = 0; k < 5; ++k) col[rows_idx[k]] = (gold[rows_idx[k]] + 1 + gen() % 2) % 3;
    cols.push_back({"l" + std::to_string(j), kCats[j % 4], col});
  }
  const auto bundle = MakeBundle(3, gold, cols);
  const auto ids = bundle.validation().learner_ids();
  const auto weighted = WeightedRule{LearnerWeights(MemberAccuracies(bundle, ids))};
  EXPECT_EQ(EnsemblePredictions(bundle.validation(), ids, weighted),
            EnsemblePredictions(bundle.validation(), ids, MajorityRule{}));
}

TEST(WmvConstruct, Examples) {
  const std::vector<Label> gold(10, 0);
  std::vector<Label> nine(10, 0), six(10, 0);
  nine[0] = 1;
  for (int i = 0; i < 4; ++i) six[i] = 1;
  const auto bundle = MakeBundle(2, gold, {{"a", kTr, nine}, {"b", kBow, six}});

  const std::vector<std::string> just_a = {"a"};
  const auto single = WmvConstruct(bundle, just_a);
  EXPECT_EQ(single.members, just_a);
  EXPECT_DOUBLE_EQ(std::get<WeightedRule>(single.rule).weights.entries.at("a"), 1.0);
  EXPECT_DOUBLE_EQ(single.validation_score, 0.9);

  const std::vector<std::string> both = {"a", "b"};
  const auto pair = WmvConstruct(bundle, both);
  const auto& w = std::get<WeightedRule>(pair.rule).weights.entries;
  EXPECT_NEAR(w.at("a"), 0.6923076923, 1e-9);
  EXPECT_NEAR(w.at("b"), 0.3076923077, 1e-9);
  EXPECT_THROW(WmvConstruct(bundle, {}), InputError);
}

TEST(WmvConstruct, ScoreMatchesReferenceOnRandomBundles) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto bundle = GenerateSynthetic(test::RandomSpec(seed, 8, 1000, 3, seed % 2));
    const auto ids = bundle.validation().learner_ids();
    for (const bool per_cat : {false, true}) {
      const auto s = WmvConstruct(bundle, ids,
                                  per_cat ? WmvNormalization::kPerCategory
                                          : WmvNormalization::kGlobal);
      EXPECT_EQ(s.validation_score,
                test::ReferenceWmvAccuracy(bundle, bundle.validation(), ids, per_cat));
      const auto& w = std::get<WeightedRule>(s.rule).weights.entries;
      const auto ref = test::ReferenceWmvWeights(bundle, ids, per_cat);
      for (const auto& [id, x] : ref) EXPECT_NEAR(w.at(id), x, 1e-12);
    }
  }
}

// --- VoteTally / SubsetEvaluator --------------------------------------------

VoteTally ScratchTally(const DatasetBundle& bundle, const std::vector<bool>& in,
                       SubsetScoring scoring) {
  const auto& m = bundle.validation();
  const int groups = scoring == SubsetScoring::kMajority ? 1 : 4;
  VoteTally t(m.rows(), m.class_count(), groups);
  const auto cats = ColumnCategories(bundle, m);
  for (std::size_t j = 0; j < in.size(); ++j) {
    if (!in[j]) continue;
    if (scoring == SubsetScoring::kMajority) {
      t.Add(m.column(j), 0, 1);
    } else {
      t.Add(m.column(j), static_cast<int>(cats[j]),
            static_cast<std::int64_t>(m.CorrectCount(j)));
    }
  }
  return t;
}

TEST(SubsetEvaluator, RandomAddRemoveMatchesScratch) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(4, 10, 600, 3, true));
  const auto& m = bundle.validation();
  const auto cats = ColumnCategories(bundle, m);
  std::mt19937_64 gen(77);
  for (const auto scoring : {SubsetScoring::kMajority, SubsetScoring::kWmv,
                             SubsetScoring::kWmvPerCategory}) {
    SubsetEvaluator eval(m, cats, scoring);
    std::vector<bool> in(m.learner_count(), false);
    for (int step = 0; step < 400; ++step) {
      const std::size_t j = gen() % m.learner_count();
      if (in[j]) {
        eval.Remove(j);
      } else {
        eval.Add(j);
      }
      in[j] = !in[j];
      ASSERT_EQ(eval.tally(), ScratchTally(bundle, in, scoring));
      std::vector<std::string> members;
      for (std::size_t k = 0; k < in.size(); ++k) {
        if (in[k]) members.push_back(m.learner_ids()[k]);
      }
      AggregationRule rule = MajorityRule{};
      if (scoring != SubsetScoring::kMajority && !members.empty()) {
        rule = WeightedRule{LearnerWeights(
            MemberAccuracies(bundle, members),
            scoring == SubsetScoring::kWmv ? WmvNormalization::kGlobal
                                           : WmvNormalization::kPerCategory)};
      }
      ASSERT_EQ(eval.Accuracy(), EvaluateEnsemble(m, members, rule));
      ASSERT_EQ(eval.size(), members.size());
    }
    eval.Clear();
    EXPECT_EQ(eval.size(), 0u);
    EXPECT_EQ(eval.Accuracy(), 0.0);
  }
}

TEST(SubsetEvaluator, ZeroAccuracyMembersScoreZero) {
  const std::vector<Label> gold = {0, 1, 0, 1};
  const auto bundle = MakeBundle(2, gold, {{"w", kBow, {1, 0, 1, 0}},
                                           {"r", kTr, gold}});
  const auto cats = ColumnCategories(bundle, bundle.validation());
  SubsetEvaluator eval(bundle.validation(), cats, SubsetScoring::kWmv);
  eval.Add(0);
  EXPECT_EQ(eval.Accuracy(), 0.0);
  eval.Add(1);
  EXPECT_EQ(eval.Accuracy(), 1.0);
}

TEST(SubsetEvaluator, CategoryCountMismatch) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(4, 3, 10, 2, false));
  std::vector<LearnerCategory> cats(2, kBow);
  EXPECT_THROW(SubsetEvaluator(bundle.validation(), cats, SubsetScoring::kWmv),
               InputError);
}

TEST(VoteTally, AddThenRemoveRestoresZero) {
  VoteTally t(3, 2, 1);
  const std::vector<Label> col = {0, 1, 1};
  t.Add(col, 0, 5);
  EXPECT_EQ(t.at(1, 0, 1), 5);
  EXPECT_EQ(t.weight_sum(0), 5);
  t.Remove(col, 0, 5);
  EXPECT_EQ(t, VoteTally(3, 2, 1));
}

}  // namespace
}  // namespace hec
