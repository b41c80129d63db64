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

#include <cmath>
#include <set>

#include "hec/errors.hpp"

namespace hec {

namespace {

// Relative width of the tie band in SelectClass. Sums of the same weights in
// different orders differ by a few ulps; genuine score gaps are far larger.
constexpr double kTieTolerance = 1e-12;

void CheckAccuracy(double accuracy, std::string_view what) {
  if (!std::isfinite(accuracy) || accuracy < 0.0 || accuracy > 1.0) {
    throw InputError(std::string(what) + " accuracy must lie in [0,1]");
  }
}

// Per-member weights aligned with `members`, validated against the rule.
std::vector<double> AlignedWeights(const AggregationRule& rule,
                                   std::span<const std::string> members) {
  std::set<std::string_view> unique(members.begin(), members.end());
  if (unique.size() != members.size()) {
    throw InputError("duplicate ensemble member");
  }
  std::vector<double> weights(members.size(), 1.0);
  if (const auto* weighted = std::get_if<WeightedRule>(&rule)) {
    const auto& entries = weighted->weights.entries;
    if (entries.size() != members.size()) {
      throw InputError("weighted rule does not cover exactly the members");
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto it = entries.find(members[i]);
      if (it == entries.end()) {
        throw InputError("weighted rule has no weight for '" + members[i] +
                         "'");
      }
      if (!(it->second >= 0.0) || !std::isfinite(it->second)) {
        throw InputError("weight for '" + members[i] + "' is negative");
      }
      weights[i] = it->second;
    }
  }
  return weights;
}

}  // namespace

double WeightVector::Total() const {
  double total = 0.0;
  for (const auto& [id, w] : entries) total += w;
  return total;
}

std::map<LearnerCategory, double> ClassWeights(
    const std::map<LearnerCategory, double>& mean_accuracy) {
  if (mean_accuracy.empty()) throw InputError("no categories present");
  double total = 0.0;
  for (const auto& [category, accuracy] : mean_accuracy) {
    CheckAccuracy(accuracy, CategoryTag(category));
    total += accuracy;
  }
  if (total <= 0.0) throw InputError("all category accuracies are zero");
  std::map<LearnerCategory, double> weights;
  for (const auto& [category, accuracy] : mean_accuracy) {
    weights[category] = accuracy / total;
  }
  return weights;
}

WeightVector LearnerWeights(std::span<const AccuracyEntry> learners,
                            WmvNormalization normalization) {
  if (learners.empty()) throw InputError("empty learner set");
  std::map<LearnerCategory, double> sum;
  std::map<LearnerCategory, int> count;
  std::set<std::string_view> ids;
  for (const auto& l : learners) {
    CheckAccuracy(l.accuracy, l.id);
    if (!ids.insert(l.id).second) {
      throw InputError("duplicate learner id '" + l.id + "'");
    }
    sum[l.category] += l.accuracy;
    count[l.category] += 1;
  }

  WeightVector result;
  if (normalization == WmvNormalization::kPerCategory) {
    bool any_positive = false;
    for (const auto& l : learners) {
      const double denom = sum[l.category];
      const double w = denom > 0.0 ? l.accuracy / denom : 0.0;
      any_positive = any_positive || w > 0.0;
      result.entries[l.id] = w;
    }
    if (!any_positive) throw InputError("all accuracies are zero");
    return result;
  }

  std::map<LearnerCategory, double> mean;
  for (const auto& [category, s] : sum) mean[category] = s / count[category];
  const auto class_weight = ClassWeights(mean);
  double total = 0.0;
  for (const auto& l : learners) total += l.accuracy * class_weight.at(l.category);
  if (total <= 0.0) throw InputError("all accuracies are zero");
  for (const auto& l : learners) {
    result.entries[l.id] = l.accuracy * class_weight.at(l.category) / total;
  }
  return result;
}

std::vector<AccuracyEntry> MemberAccuracies(
    const DatasetBundle& bundle, std::span<const std::string> members) {
  std::vector<AccuracyEntry> out;
  out.reserve(members.size());
  for (const auto& id : members) {
    out.push_back({id, LearnerAccuracy(bundle.validation(), id),
                   bundle.MetaFor(id).category});
  }
  return out;
}

Label SelectClass(std::span<const double> class_scores) {
  double total = 0.0;
  for (const double s : class_scores) total += std::fabs(s);
  const double band = kTieTolerance * total;
  std::size_t best = 0;
  for (std::size_t c = 1; c < class_scores.size(); ++c) {
    if (class_scores[c] > class_scores[best] + band) best = c;
  }
  return static_cast<Label>(best);
}

Label WeightedVote(const AggregationRule& rule,
                   const std::map<std::string, Label>& votes, int class_count) {
  std::vector<std::string> members;
  members.reserve(votes.size());
  for (const auto& [id, label] : votes) members.push_back(id);
  const std::vector<double> weights = AlignedWeights(rule, members);
  std::vector<double> scores(static_cast<std::size_t>(class_count), 0.0);
  std::size_t i = 0;
  for (const auto& [id, label] : votes) {
    if (label >= static_cast<Label>(class_count)) {
      throw InputError("vote label out of range for '" + id + "'");
    }
    scores[label] += weights[i++];
  }
  return SelectClass(scores);
}

std::vector<Label> EnsemblePredictions(const PredictionMatrix& matrix,
                                       std::span<const std::string> members,
                                       const AggregationRule& rule) {
  const std::vector<double> weights = AlignedWeights(rule, members);
  std::vector<std::span<const Label>> columns;
  columns.reserve(members.size());
  for (const auto& id : members) columns.push_back(matrix.column(id));

  const auto classes = static_cast<std::size_t>(matrix.class_count());
  std::vector<Label> predictions(matrix.rows(), 0);
  std::vector<double> scores(classes);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    std::fill(scores.begin(), scores.end(), 0.0);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      scores[columns[i][r]] += weights[i];
    }
    predictions[r] = SelectClass(scores);
  }
  return predictions;
}

double EvaluateEnsemble(const PredictionMatrix& matrix,
                        std::span<const std::string> members,
                        const AggregationRule& rule) {
  if (members.empty()) return 0.0;
  const std::vector<Label> predictions =
      EnsemblePredictions(matrix, members, rule);
  const auto gold = matrix.gold();
  std::size_t correct = 0;
  for (std::size_t r = 0; r < predictions.size(); ++r) {
    correct += static_cast<std::size_t>(predictions[r] == gold[r]);
  }
  return static_cast<double>(correct) / static_cast<double>(matrix.rows());
}

std::vector<LearnerCategory> ColumnCategories(const DatasetBundle& bundle,
                                              const PredictionMatrix& matrix) {
  std::vector<LearnerCategory> categories;
  categories.reserve(matrix.learner_count());
  for (const auto& id : matrix.learner_ids()) {
    categories.push_back(bundle.MetaFor(id).category);
  }
  return categories;
}

EnsembleSolution WmvConstruct(const DatasetBundle& bundle,
                              std::span<const std::string> candidates,
                              WmvNormalization normalization) {
  if (candidates.empty()) throw InputError("WMV needs at least one candidate");
  EnsembleSolution solution;
  solution.members.assign(candidates.begin(), candidates.end());
  solution.rule = WeightedRule{
      LearnerWeights(MemberAccuracies(bundle, candidates), normalization)};
  solution.validation_score =
      EvaluateEnsemble(bundle.validation(), solution.members, solution.rule);
  return solution;
}

}  // namespace hec
