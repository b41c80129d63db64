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

#include "hec/baselines.hpp"
#include "hec/errors.hpp"

namespace hec {

StackingFeatures::StackingFeatures(const PredictionMatrix& matrix,
                                   std::span<const std::string> learner_ids)
    : rows_(matrix.rows()),
      learners_(learner_ids.size()),
      dim_(learner_ids.size() * matrix.class_count() + 1),
      class_count_(matrix.class_count()),
      active_(rows_ * learners_) {
  for (std::size_t j = 0; j < learners_; ++j) {
    const auto found = matrix.Find(learner_ids[j]);
    if (!found) {
      throw InputError("learner-set mismatch: '" + learner_ids[j] +
                       "' is not in the " +
                       std::string(SplitName(matrix.split())) + " matrix");
    }
    const auto column = matrix.column(*found);
    for (std::size_t r = 0; r < rows_; ++r) {
      active_[r * learners_ + j] =
          static_cast<std::uint32_t>(j * class_count_ + column[r]);
    }
  }
}

double StackingStableLearningRate(std::size_t learners, double l2) {
  return 2.0 / ((static_cast<double>(learners) + 1.0) / 2.0 + l2);
}

double StackingLoss(const StackingFeatures& features,
                    std::span<const Label> gold, std::span<const double> weights,
                    double l2, std::vector<double>* gradient) {
  const std::size_t dim = features.dim();
  const std::size_t bias = dim - 1;
  const auto classes = static_cast<std::size_t>(features.class_count());
  const double inv_rows = 1.0 / static_cast<double>(features.rows());
  if (gradient != nullptr) gradient->assign(weights.size(), 0.0);

  std::vector<double> logits(classes);
  double data_loss = 0.0;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto active = features.active(r);
    for (std::size_t c = 0; c < classes; ++c) {
      const double* w = weights.data() + c * dim;
      double z = w[bias];
      for (const std::uint32_t f : active) z += w[f];
      logits[c] = z;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double norm = 0.0;
    for (const double z : logits) norm += std::exp(z - top);
    const double log_norm = top + std::log(norm);
    data_loss += log_norm - logits[gold[r]];
    if (gradient != nullptr) {
      for (std::size_t c = 0; c < classes; ++c) {
        const double p = std::exp(logits[c] - log_norm);
        const double dz = (p - (c == gold[r] ? 1.0 : 0.0)) * inv_rows;
        double* g = gradient->data() + c * dim;
        g[bias] += dz;
        for (const std::uint32_t f : active) g[f] += dz;
      }
    }
  }

  double penalty = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t f = 0; f < bias; ++f) {
      const double w = weights[c * dim + f];
      penalty += w * w;
      if (gradient != nullptr) (*gradient)[c * dim + f] += l2 * w;
    }
  }
  return data_loss * inv_rows + 0.5 * l2 * penalty;
}

StackingModel StackingFit(const DatasetBundle& bundle,
                          std::span<const std::string> learner_ids,
                          const StackingParams& params) {
  if (learner_ids.empty()) throw InputError("stacking needs at least one learner");
  if (!std::isfinite(params.learning_rate) || params.learning_rate <= 0.0) {
    throw InputError("stacking learning rate must be > 0");
  }
  if (!std::isfinite(params.l2) || params.l2 < 0.0) {
    throw InputError("stacking L2 coefficient must be >= 0");
  }
  const PredictionMatrix& validation = bundle.validation();
  const StackingFeatures features(validation, learner_ids);

  StackingModel model;
  model.learner_ids.assign(learner_ids.begin(), learner_ids.end());
  model.class_count = validation.class_count();
  model.feature_dim = features.dim();
  model.params = params;
  model.weights.assign(
      static_cast<std::size_t>(model.class_count) * model.feature_dim, 0.0);

  std::vector<double> gradient;
  for (std::size_t epoch = 0; epoch <= params.epochs; ++epoch) {
    const bool last = epoch == params.epochs;
    const double loss = StackingLoss(features, validation.gold(), model.weights,
                                     params.l2, last ? nullptr : &gradient);
    if (!std::isfinite(loss)) {
      throw ComputationError("stacking diverged at epoch " +
                             std::to_string(epoch) +
                             " (non-finite loss); lower the learning rate");
    }
    model.loss_history.push_back(loss);
    if (last) break;
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      model.weights[i] -= params.learning_rate * gradient[i];
    }
  }
  return model;
}

std::vector<Label> StackingPredict(const StackingModel& model,
                                   const PredictionMatrix& matrix) {
  if (matrix.class_count() != model.class_count) {
    throw InputError("class count differs from the stacking model");
  }
  const StackingFeatures features(matrix, model.learner_ids);
  const std::size_t dim = model.feature_dim;
  const std::size_t bias = dim - 1;
  const auto classes = static_cast<std::size_t>(model.class_count);
  std::vector<Label> out(matrix.rows());
  std::vector<double> logits(classes);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto active = features.active(r);
    for (std::size_t c = 0; c < classes; ++c) {
      const double* w = model.weights.data() + c * dim;
      double z = w[bias];
      for (const std::uint32_t f : active) z += w[f];
      logits[c] = z;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (logits[c] > logits[best]) best = c;
    }
    out[r] = static_cast<Label>(best);
  }
  return out;
}

}  // namespace hec
