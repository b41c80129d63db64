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
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "hec/baselines.hpp"
#include "hec/errors.hpp"
#include "test_util.hpp"

namespace hec {
namespace {

constexpr auto kBow = LearnerCategory::kBow;

double MaxRelativeGradientError(const StackingFeatures& f,
                                std::span<const Label> gold,
                                std::vector<double> w, double l2) {
  std::vector<double> analytic;
  StackingLoss(f, gold, w, l2, &analytic);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double keep = w[i];
    w[i] = keep + h;
    const double up = StackingLoss(f, gold, w, l2, nullptr);
    w[i] = keep - h;
    const double down = StackingLoss(f, gold, w, l2, nullptr);
    w[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::fabs(numeric), std::fabs(analytic[i]), 1e-5});
    worst = std::max(worst, std::fabs(numeric - analytic[i]) / scale);
  }
  return worst;
}

TEST(StackingLoss, GradientMatchesFiniteDifferences) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(3, 4, 120, 3, true));
  const auto ids = bundle.validation().learner_ids();
  const StackingFeatures f(bundle.validation(), ids);
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal(0.0, 0.7);
  for (int point = 0; point < 10; ++point) {
    std::vector<double> w(3 * f.dim());
    for (auto& x : w) x = normal(gen);
    EXPECT_LT(MaxRelativeGradientError(f, bundle.validation().gold(), w, 0.01), 1e-4);
  }
}

TEST(StackingLoss, ZeroWeightsGiveLogClassCount) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(3, 3, 50, 4, false));
  const StackingFeatures f(bundle.validation(), bundle.validation().learner_ids());
  std::vector<double> w(4 * f.dim(), 0.0);
  EXPECT_NEAR(StackingLoss(f, bundle.validation().gold(), w, 1.0, nullptr),
              std::log(4.0), 1e-12);
}

TEST(StackingFit, LossNonIncreasingBelowStabilityBound) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto bundle = GenerateSynthetic(test::RandomSpec(seed, 3 + seed, 300, 3, seed % 2));
    const auto ids = bundle.validation().learner_ids();
    StackingParams params;
    ASSERT_LT(params.learning_rate, StackingStableLearningRate(ids.size(), params.l2));
    const auto model = StackingFit(bundle, ids, params);
    ASSERT_EQ(model.loss_history.size(), params.epochs + 1);
    for (std::size_t e = 1; e < model.loss_history.size(); ++e) {
      EXPECT_LE(model.loss_history[e], model.loss_history[e - 1]) << e;
    }
    // Just under the bound is still monotone.
    params.learning_rate = 0.95 * StackingStableLearningRate(ids.size(), params.l2);
    params.epochs = 200;
    const auto fast = StackingFit(bundle, ids, params);
    for (std::size_t e = 1; e < fast.loss_history.size(); ++e) {
      EXPECT_LE(fast.loss_history[e], fast.loss_history[e - 1] + 1e-15) << e;
    }
  }
}

TEST(StackingFit, SeparableSingleLearner) {
  const auto base = GenerateSynthetic(test::RandomSpec(5, 1, 200, 2, false));
  const std::vector<Label> gold(base.validation().gold().begin(),
                                base.validation().gold().end());
  const auto bundle = test::MakeBundle(2, gold, {{"p", kBow, gold}});
  const std::vector<std::string> ids = {"p"};
  const auto model = StackingFit(bundle, ids, StackingParams{});
  EXPECT_EQ(StackingPredict(model, bundle.validation()), gold);
}

TEST(StackingFit, ZeroEpochsPredictsClassZero) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(9, 3, 300, 3, false));
  const auto ids = bundle.validation().learner_ids();
  StackingParams params;
  params.epochs = 0;
  const auto model = StackingFit(bundle, ids, params);
  EXPECT_TRUE(std::all_of(model.weights.begin(), model.weights.end(),
                          [](double w) { return w == 0.0; }));
  const auto pred = StackingPredict(model, bundle.validation());
  EXPECT_TRUE(std::all_of(pred.begin(), pred.end(), [](Label l) { return l == 0; }));
}

TEST(StackingPredict, RowPermutationPermutesOutput) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(4, 5, 200, 3, true));
  const auto ids = bundle.validation().learner_ids();
  StackingParams params;
  params.epochs = 100;
  const auto model = StackingFit(bundle, ids, params);
  const auto& t = bundle.test();
  const auto pred = StackingPredict(model, t);

  std::vector<std::size_t> order(t.rows());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(2);
  std::shuffle(order.begin(), order.end(), gen);
  std::vector<Label> gold;
  std::vector<test::Column> cols;
  for (const auto& id : t.learner_ids()) cols.push_back({id, kBow, {}});
  for (const auto r : order) {
    gold.push_back(t.gold()[r]);
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j].labels.push_back(t.column(j)[r]);
  }
  const auto permuted = test::MakeMatrix(Split::kTest, 3, gold, cols);
  const auto ppred = StackingPredict(model, permuted);
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(ppred[i], pred[order[i]]);
}

TEST(StackingFit, ErrorPaths) {
  const auto bundle = GenerateSynthetic(test::RandomSpec(4, 3, 100, 2, false));
  const auto ids = bundle.validation().learner_ids();
  StackingParams params;
  params.learning_rate = 0.0;
  EXPECT_THROW(StackingFit(bundle, ids, params), InputError);
  params = StackingParams{};
  params.l2 = -1.0;
  EXPECT_THROW(StackingFit(bundle, ids, params), InputError);
  EXPECT_THROW(StackingFit(bundle, {}, StackingParams{}), InputError);

  params = StackingParams{};
  params.learning_rate = 1e306;
  params.epochs = 20;
  EXPECT_THROW(StackingFit(bundle, ids, params), ComputationError);

  const auto model = StackingFit(bundle, ids, StackingParams{});
  try {
    StackingPredict(model, test::MakeMatrix(Split::kTest, 2, {0, 1},
                                            {{"l0", kBow, {0, 1}}}));
    ADD_FAILURE();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("learner-set mismatch"), std::string::npos);
  }
}

}  // namespace
}  // namespace hec
