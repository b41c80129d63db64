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

// Naive-Bayes evidence combiner: learner outputs are treated as conditionally
// independent evidence about the true class.
//
//   P(y | f_1..f_n)  ~  P(y) * prod_j P(f_j | y)
//
// with P(y) the validation gold frequency and
// P(f_j = c | y) = (count(f_j = c, gold = y) + alpha) / (count(gold = y) + C alpha).

#include <cmath>
#include <limits>

#include "hec/baselines.hpp"
#include "hec/errors.hpp"

namespace hec {

namespace {

// Unnormalised log-posterior of every class for every row.
std::vector<double> LogScores(const BayesCombiner& combiner,
                              const PredictionMatrix& matrix) {
  if (matrix.class_count() != combiner.class_count) {
    throw InputError("class count differs from the Bayes combiner");
  }
  const auto classes = static_cast<std::size_t>(combiner.class_count);
  std::vector<std::span<const Label>> columns;
  for (const auto& id : combiner.learner_ids) {
    const auto found = matrix.Find(id);
    if (!found) throw InputError("learner-set mismatch: '" + id + "' missing");
    columns.push_back(matrix.column(*found));
  }
  std::vector<double> log_prior(classes);
  for (std::size_t y = 0; y < classes; ++y) {
    log_prior[y] = combiner.prior[y] > 0.0
                       ? std::log(combiner.prior[y])
                       : -std::numeric_limits<double>::infinity();
  }
  std::vector<std::vector<double>> log_cond(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    log_cond[j].resize(classes * classes);
    for (std::size_t i = 0; i < classes * classes; ++i) {
      log_cond[j][i] = std::log(combiner.conditionals[j][i]);
    }
  }
  std::vector<double> scores(matrix.rows() * classes);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t y = 0; y < classes; ++y) {
      double s = log_prior[y];
      for (std::size_t j = 0; j < columns.size(); ++j) {
        s += log_cond[j][y * classes + columns[j][r]];
      }
      scores[r * classes + y] = s;
    }
  }
  return scores;
}

}  // namespace

BayesCombiner BayesFit(const DatasetBundle& bundle,
                       std::span<const std::string> learner_ids, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InputError("Bayes smoothing alpha must be > 0");
  }
  if (learner_ids.empty()) throw InputError("Bayes combiner needs a learner");
  const PredictionMatrix& validation = bundle.validation();
  const auto classes = static_cast<std::size_t>(validation.class_count());
  const auto gold = validation.gold();

  BayesCombiner combiner;
  combiner.learner_ids.assign(learner_ids.begin(), learner_ids.end());
  combiner.class_count = validation.class_count();
  combiner.alpha = alpha;

  std::vector<double> gold_count(classes, 0.0);
  for (const Label y : gold) gold_count[y] += 1.0;
  combiner.prior.resize(classes);
  for (std::size_t y = 0; y < classes; ++y) {
    combiner.prior[y] = gold_count[y] / static_cast<double>(validation.rows());
  }

  const double c_alpha = static_cast<double>(classes) * alpha;
  for (const auto& id : learner_ids) {
    const auto column = validation.column(id);
    std::vector<double> counts(classes * classes, 0.0);
    for (std::size_t r = 0; r < validation.rows(); ++r) {
      counts[gold[r] * classes + column[r]] += 1.0;
    }
    for (std::size_t y = 0; y < classes; ++y) {
      for (std::size_t c = 0; c < classes; ++c) {
        counts[y * classes + c] =
            (counts[y * classes + c] + alpha) / (gold_count[y] + c_alpha);
      }
    }
    combiner.conditionals.push_back(std::move(counts));
  }
  return combiner;
}

std::vector<double> BayesPosterior(const BayesCombiner& combiner,
                                   const PredictionMatrix& matrix) {
  std::vector<double> scores = LogScores(combiner, matrix);
  const auto classes = static_cast<std::size_t>(combiner.class_count);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    double* row = scores.data() + r * classes;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < classes; ++y) top = std::max(top, row[y]);
    double norm = 0.0;
    for (std::size_t y = 0; y < classes; ++y) {
      row[y] = std::exp(row[y] - top);
      norm += row[y];
    }
    for (std::size_t y = 0; y < classes; ++y) row[y] /= norm;
  }
  return scores;
}

std::vector<Label> BayesPredict(const BayesCombiner& combiner,
                                const PredictionMatrix& matrix) {
  const std::vector<double> scores = LogScores(combiner, matrix);
  const auto classes = static_cast<std::size_t>(combiner.class_count);
  std::vector<Label> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const double* row = scores.data() + r * classes;
    std::size_t best = 0;
    for (std::size_t y = 1; y < classes; ++y) {
      if (row[y] > row[best]) best = y;
    }
    out[r] = static_cast<Label>(best);
  }
  return out;
}

}  // namespace hec
