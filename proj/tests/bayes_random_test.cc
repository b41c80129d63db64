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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "hec/baselines.hpp"
#include "hec/errors.hpp"
#include "test_util.hpp"

namespace hec {
namespace {

constexpr auto kBow = LearnerCategory::kBow;

std::vector<test::Column> ColumnsOf(const PredictionMatrix& m) {
  std::vector<test::Column> cols;
  for (std::size_t j = 0; j < m.learner_count(); ++j) {
    cols.push_back({m.learner_ids()[j], kBow, {m.column(j).begin(), m.column(j).end()}});
  }
  return cols;
}

TEST(Bayes, PerfectLearnerWithUniformPrior) {
  // Balanced gold, so the prior is uniform.
  std::vector<Label> gold;
  for (int r = 0; r < 30; ++r) gold.push_back(static_cast<Label>(r % 3));
  const auto bundle = test::MakeBundle(3, gold, {{"p", kBow, gold}});
  const std::vector<std::string> ids = {"p"};
  const auto combiner = BayesFit(bundle, ids);
  for (const double p : combiner.prior) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
  const auto other = test::MakeMatrix(Split::kTest, 3, {0, 0, 0, 0},
                                      {{"p", kBow, {2, 1, 0, 2}}});
  EXPECT_EQ(BayesPredict(combiner, other), (std::vector<Label>{2, 1, 0, 2}));
}

TEST(Bayes, UninformativeEvidenceFallsBackToPrior) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(4, 5, 400, 3, false));
  const auto ids = bundle.validation().learner_ids();
  const auto combiner = BayesFit(bundle, ids, 1e12);
  const auto prior_argmax = static_cast<Label>(
      std::max_element(combiner.prior.begin(), combiner.prior.end()) -
      combiner.prior.begin());
  for (const Label l : BayesPredict(combiner, bundle.test())) EXPECT_EQ(l, prior_argmax);
}

TEST(Bayes, PosteriorRowsSumToOne) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(5, 9, 300, 4, true));
  const auto combiner = BayesFit(bundle, bundle.validation().learner_ids(), 0.5);
  const auto post = BayesPosterior(combiner, bundle.test());
  const auto pred = BayesPredict(combiner, bundle.test());
  for (std::size_t r = 0; r < bundle.test().rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) sum += post[r * 4 + c];
    EXPECT_NEAR(sum, 1.0, 1e-9);
    const auto top = std::max_element(post.begin() + r * 4, post.begin() + r * 4 + 4) -
                     (post.begin() + r * 4);
    EXPECT_EQ(pred[r], static_cast<Label>(top));
  }
}

TEST(Bayes, ConditionalsFollowSmoothedCounts) {
  const std::vector<Label> gold = {0, 0, 1, 1, 1};
  const auto bundle = test::MakeBundle(2, gold, {{"a", kBow, {0, 1, 1, 1, 0}}});
  const std::vector<std::string> ids = {"a"};
  const auto c = BayesFit(bundle, ids, 1.0);
  // gold 0: votes {0,1}; gold 1: votes {1,1,0}.
  EXPECT_DOUBLE_EQ(c.conditionals[0][0 * 2 + 0], 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(c.conditionals[0][1 * 2 + 1], 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(c.prior[1], 0.6);
}

TEST(Bayes, InvariantUnderUniformDuplication) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto bundle = GenerateSynthetic(test::RandomSpec(seed, 6, 200, 3, true));
    const auto ids = bundle.validation().learner_ids();
    const auto& v = bundle.validation();
    for (const int k : {2, 3}) {
      std::vector<Label> gold;
      auto cols = ColumnsOf(v);
      for (auto& c : cols) c.labels.clear();
      for (int copy = 0; copy < k; ++copy) {
        for (std::size_t r = 0; r < v.rows(); ++r) {
          gold.push_back(v.gold()[r]);
          for (std::size_t j = 0; j < cols.size(); ++j) cols[j].labels.push_back(v.column(j)[r]);
        }
      }
      const auto dup = test::MakeBundle(3, gold, cols);
      const double alpha = 0.7;
      const auto base = BayesFit(bundle, ids, alpha);
      const auto scaled = BayesFit(dup, ids, alpha * k);
      EXPECT_EQ(BayesPredict(base, bundle.test()), BayesPredict(scaled, bundle.test()));
      const auto pa = BayesPosterior(base, bundle.test());
      const auto pb = BayesPosterior(scaled, bundle.test());
      for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
    }
  }
}

TEST(Bayes, Errors) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(1, 3, 50, 2, false));
  const auto ids = bundle.validation().learner_ids();
  EXPECT_THROW(BayesFit(bundle, ids, 0.0), InputError);
  EXPECT_THROW(BayesFit(bundle, {}, 1.0), InputError);
  const auto c = BayesFit(bundle, ids);
  const auto other = test::MakeMatrix(Split::kTest, 2, {0}, {{"zz", kBow, {0}}});
  EXPECT_THROW(BayesPredict(c, other), InputError);
}

TEST(RandomConstruct, DegenerateProbabilities) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(3, 6, 300, 3, false));
  const auto ids = bundle.validation().learner_ids();
  RandomSelectionParams p;
  p.inclusion_probability = 1.0;
  const auto all = RandomConstruct(bundle, ids, p);
  EXPECT_EQ(all.members, ids);
  EXPECT_TRUE(std::holds_alternative<MajorityRule>(all.rule));
  EXPECT_EQ(all.validation_score,
            test::ReferenceMajorityAccuracy(bundle.validation(), ids));

  p.inclusion_probability = 0.0;
  const auto none = RandomConstruct(bundle, ids, p);
  EXPECT_TRUE(none.members.empty());
  EXPECT_EQ(none.validation_score, 0.0);
}

TEST(RandomConstruct, DeterministicAndBestOfTrials) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(8, 10, 300, 3, true));
  const auto ids = bundle.validation().learner_ids();
  RandomSelectionParams p;
  p.rng_seed = 77;
  const auto a = RandomConstruct(bundle, ids, p);
  const auto b = RandomConstruct(bundle, ids, p);
  EXPECT_EQ(a.members, b.members);
  EXPECT_EQ(a.validation_score,
            test::ReferenceMajorityAccuracy(bundle.validation(), a.members));
  // More trials from the same streams can only help.
  p.trials = 20;
  EXPECT_GE(RandomConstruct(bundle, ids, p).validation_score, a.validation_score);
  p.trials = 1;
  EXPECT_LE(RandomConstruct(bundle, ids, p).validation_score, a.validation_score);
}

TEST(RandomConstruct, Errors) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(3, 2, 30, 2, false));
  const auto ids = bundle.validation().learner_ids();
  RandomSelectionParams p;
  p.trials = 0;
  EXPECT_THROW(RandomConstruct(bundle, ids, p), InputError);
  p = RandomSelectionParams{};
  p.inclusion_probability = 1.5;
  EXPECT_THROW(RandomConstruct(bundle, ids, p), InputError);
}

}  // namespace
}  // namespace hec
