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

// Comparison construction methods: stacking, the Shapley-value classifier,
// a naive-Bayes evidence combiner and random selection. All of them are fit
// on the validation split only.

#ifndef HEC_BASELINES_HPP_
#define HEC_BASELINES_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hec/aggregation.hpp"
#include "hec/prediction_data.hpp"

namespace hec {

// --- Stacking ----------------------------------------------------------------
//
// Multinomial logistic regression over one-hot encoded votes. The feature
// vector of a row has n * C indicator entries (learner j voting class c sets
// entry j * C + c) followed by a constant bias entry, so dim = n * C + 1.
//
// Loss: mean cross-entropy + (l2 / 2) * ||W||^2 over non-bias weights,
// minimised by full-batch gradient descent from W = 0.
//
// Every row has exactly n + 1 active features and the softmax Hessian is
// bounded by 1/2, so the gradient is L-Lipschitz with L <= (n + 1) / 2 + l2.
// Gradient descent is monotone for learning rates below
// StackingStableLearningRate() = 2 / L.

struct StackingParams {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
};

struct StackingModel {
  std::vector<std::string> learner_ids;  // feature order
  int class_count = 2;
  std::size_t feature_dim = 0;           // learners * classes + 1
  std::vector<double> weights;           // class_count x feature_dim, row-major
  StackingParams params;
  std::vector<double> loss_history;      // loss before each epoch, then final
};

// Sparse one-hot features: the active indices of every row.
class StackingFeatures {
 public:
  StackingFeatures(const PredictionMatrix& matrix,
                   std::span<const std::string> learner_ids);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  int class_count() const { return class_count_; }
  // Active non-bias feature indices of `row` (one per learner).
  std::span<const std::uint32_t> active(std::size_t row) const {
    return {active_.data() + row * learners_, learners_};
  }

 private:
  std::size_t rows_;
  std::size_t learners_;
  std::size_t dim_;
  int class_count_;
  std::vector<std::uint32_t> active_;
};

double StackingStableLearningRate(std::size_t learners, double l2);

// Regularised loss at `weights`; fills `gradient` when non-null.
double StackingLoss(const StackingFeatures& features,
                    std::span<const Label> gold, std::span<const double> weights,
                    double l2, std::vector<double>* gradient);

// Throws ComputationError if the loss becomes non-finite.
StackingModel StackingFit(const DatasetBundle& bundle,
                          std::span<const std::string> learner_ids,
                          const StackingParams& params);

// Throws InputError if the matrix lacks any of the model's learners.
std::vector<Label> StackingPredict(const StackingModel& model,
                                   const PredictionMatrix& matrix);

// --- Shapley values ------------------------------------------------------------
//
// The game: v(S) = validation accuracy of S under uniform majority vote (or
// two-step WMV), v(empty) = 0.

enum class ShapleyMethod : std::uint8_t {
  kExact,
  kMonteCarlo,
  kMultilinear,
  kExpectedMarginal,
};

enum class ShapleyGame : std::uint8_t { kMajority, kWeighted };

std::string_view ShapleyMethodName(ShapleyMethod method);

inline constexpr std::size_t kMaxExactShapleyLearners = 16;

struct ShapleyParams {
  ShapleyMethod method = ShapleyMethod::kMonteCarlo;
  std::size_t sample_count = 1000;
  std::uint64_t rng_seed = 0;
  ShapleyGame game = ShapleyGame::kMajority;
  std::size_t threads = 1;
};

struct ShapleyResult {
  std::map<std::string, double> values;
  ShapleyMethod method = ShapleyMethod::kExact;
  std::size_t samples_used = 0;
};

ShapleyResult ShapleyValues(const DatasetBundle& bundle,
                            std::span<const std::string> learner_ids,
                            const ShapleyParams& params);

// Weights max(value, 0) normalised to one; learners with zero weight are
// dropped. Throws ComputationError when no value is positive.
EnsembleSolution ShapleyConstruct(const DatasetBundle& bundle,
                                  const ShapleyResult& values);

// --- Naive-Bayes evidence combiner ---------------------------------------------

struct BayesCombiner {
  std::vector<std::string> learner_ids;
  int class_count = 2;
  double alpha = 1.0;
  std::vector<double> prior;  // per class
  // Per learner, row-major C x C: conditionals[j][y * C + c] = P(f_j = c | y).
  std::vector<std::vector<double>> conditionals;
};

BayesCombiner BayesFit(const DatasetBundle& bundle,
                       std::span<const std::string> learner_ids,
                       double alpha = 1.0);

// Normalised posterior over classes for every row (row-major rows x C).
std::vector<double> BayesPosterior(const BayesCombiner& combiner,
                                   const PredictionMatrix& matrix);

std::vector<Label> BayesPredict(const BayesCombiner& combiner,
                                const PredictionMatrix& matrix);

// --- Random selection ------------------------------------------------------------

struct RandomSelectionParams {
  std::size_t trials = 5;
  double inclusion_probability = 0.5;
  std::uint64_t rng_seed = 0;
};

// Each trial keeps every learner independently with the inclusion
// probability, scores the draw by majority vote on validation, and the best
// trial (earliest on ties) is returned. An empty draw scores 0.
EnsembleSolution RandomConstruct(const DatasetBundle& bundle,
                                 std::span<const std::string> learner_ids,
                                 const RandomSelectionParams& params);

}  // namespace hec

#endif  // HEC_BASELINES_HPP_
