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

// Voting rules and the two-step weighted majority vote (WMV).
//
// WMV first weights each learner category by its mean validation accuracy,
//
//   W_k = Accuracy_k / sum_l Accuracy_l,
//
// then each learner by u_i = Accuracy_i * W_k, normalised over all learners
// so that the complete weight vector sums to one. The per-class variant
// (`WmvNormalization::kPerCategory`) normalises u_i within each category
// instead, which cancels W_k and makes every category's weights sum to one.
//
// Every construction method scores ensembles through `EvaluateEnsemble`. The
// HEC search and the Shapley games need the same score for thousands of
// closely related member sets; `SubsetEvaluator` maintains an integer
// `VoteTally` that supports adding and removing one learner in O(rows).

#ifndef HEC_AGGREGATION_HPP_
#define HEC_AGGREGATION_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hec/prediction_data.hpp"

namespace hec {

// learner id -> non-negative weight.
struct WeightVector {
  std::map<std::string, double> entries;

  double Total() const;
  bool operator==(const WeightVector&) const = default;
};

struct MajorityRule {
  bool operator==(const MajorityRule&) const = default;
};
struct WeightedRule {
  WeightVector weights;
  bool operator==(const WeightedRule&) const = default;
};
using AggregationRule = std::variant<MajorityRule, WeightedRule>;

enum class WmvNormalization : std::uint8_t {
  kGlobal,       // all weights sum to one
  kPerCategory,  // weights of each category sum to one
};

struct AccuracyEntry {
  std::string id;
  double accuracy = 0.0;
  LearnerCategory category = LearnerCategory::kLexicon;
};

// Category weights from mean accuracies. Throws InputError if empty, if an
// accuracy is outside [0,1], or if all are zero.
std::map<LearnerCategory, double> ClassWeights(
    const std::map<LearnerCategory, double>& mean_accuracy);

// Two-step WMV learner weights; categories absent from `learners` take no
// part in the class weighting.
WeightVector LearnerWeights(std::span<const AccuracyEntry> learners,
                            WmvNormalization normalization =
                                WmvNormalization::kGlobal);

// Per-learner validation accuracies and categories for `members`.
std::vector<AccuracyEntry> MemberAccuracies(
    const DatasetBundle& bundle, std::span<const std::string> members);

// Index of the largest score; scores within rounding noise of the maximum
// count as tied and the lowest class index wins.
Label SelectClass(std::span<const double> class_scores);

// Aggregates one example's votes (learner id -> label). The rule must cover
// exactly the voting learners.
Label WeightedVote(const AggregationRule& rule,
                   const std::map<std::string, Label>& votes, int class_count);

// Ensemble prediction for every row of `matrix`.
std::vector<Label> EnsemblePredictions(const PredictionMatrix& matrix,
                                       std::span<const std::string> members,
                                       const AggregationRule& rule);

// Accuracy of the ensemble on `matrix`. The empty ensemble scores 0.0.
double EvaluateEnsemble(const PredictionMatrix& matrix,
                        std::span<const std::string> members,
                        const AggregationRule& rule);

// Per-example, per-group, per-class accumulated integer weight.
//
// Groups let a scorer rescale whole categories without touching the tally:
// the WMV scorer keeps one group per learner category and weights each
// learner by its validation correct-count, so adding a learner never changes
// the stored contribution of any other learner.
class VoteTally {
 public:
  VoteTally(std::size_t rows, int class_count, int groups);

  void Add(std::span<const Label> column, int group, std::int64_t weight);
  void Remove(std::span<const Label> column, int group, std::int64_t weight);
  void Clear();

  std::size_t rows() const { return rows_; }
  int class_count() const { return class_count_; }
  int groups() const { return groups_; }

  std::int64_t at(std::size_t row, int group, Label label) const {
    return cells_[(row * groups_ + group) * class_count_ + label];
  }
  // Row-major [row][group][class].
  std::span<const std::int64_t> cells() const { return cells_; }

  // Number of columns currently in `group` and their summed weight.
  std::int64_t member_count(int group) const { return member_count_[group]; }
  std::int64_t weight_sum(int group) const { return weight_sum_[group]; }

  bool operator==(const VoteTally&) const = default;

 private:
  std::size_t rows_;
  int class_count_;
  int groups_;
  std::vector<std::int64_t> cells_;
  std::vector<std::int64_t> member_count_;
  std::vector<std::int64_t> weight_sum_;
};

// How a SubsetEvaluator turns its tally into predictions.
enum class SubsetScoring : std::uint8_t {
  kMajority,        // uniform vote
  kWmv,             // two-step WMV, global normalisation
  kWmvPerCategory,  // two-step WMV, per-category normalisation
};

// Incrementally maintained ensemble over learner column indices of one
// matrix. Its accuracy equals EvaluateEnsemble on the same members with
// MajorityRule or LearnerWeights(...) respectively.
class SubsetEvaluator {
 public:
  SubsetEvaluator(const PredictionMatrix& matrix,
                  std::span<const LearnerCategory> categories,
                  SubsetScoring scoring);

  void Add(std::size_t learner);
  void Remove(std::size_t learner);
  void Clear();

  std::size_t size() const { return member_count_; }
  bool Contains(std::size_t learner) const { return in_set_[learner] != 0; }

  // Fraction of rows predicted correctly; 0.0 for the empty set.
  double Accuracy() const;
  std::size_t CorrectRows() const;

  const VoteTally& tally() const { return tally_; }

 private:
  const PredictionMatrix& matrix_;
  std::vector<int> group_of_;
  std::vector<std::int64_t> weight_of_;
  SubsetScoring scoring_;
  VoteTally tally_;
  std::vector<std::uint8_t> in_set_;
  std::size_t member_count_ = 0;
};

// Column categories of `matrix` in column order, looked up in the bundle
// metadata.
std::vector<LearnerCategory> ColumnCategories(const DatasetBundle& bundle,
                                              const PredictionMatrix& matrix);

// One examined candidate of an annealing trajectory.
struct TraceRecord {
  std::uint64_t seed_index = 0;
  std::string candidate_id;
  double delta_e = 0.0;
  double temperature = 0.0;
  double u = 0.0;
  bool accepted = false;

  bool operator==(const TraceRecord&) const = default;
};

struct EnsembleSolution {
  std::vector<std::string> members;
  AggregationRule rule;
  double validation_score = 0.0;
  std::vector<TraceRecord> trace;
};

// WMV over every candidate, weighted by validation accuracy.
EnsembleSolution WmvConstruct(const DatasetBundle& bundle,
                              std::span<const std::string> candidates,
                              WmvNormalization normalization =
                                  WmvNormalization::kGlobal);

}  // namespace hec

#endif  // HEC_AGGREGATION_HPP_
