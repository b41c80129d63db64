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

#include <array>
#include <cassert>

#include "hec/aggregation.hpp"
#include "hec/errors.hpp"

namespace hec {

VoteTally::VoteTally(std::size_t rows, int class_count, int groups)
    : rows_(rows),
      class_count_(class_count),
      groups_(groups),
      cells_(rows * static_cast<std::size_t>(groups) *
                 static_cast<std::size_t>(class_count),
             0),
      member_count_(static_cast<std::size_t>(groups), 0),
      weight_sum_(static_cast<std::size_t>(groups), 0) {
  if (class_count < 1 || groups < 1) {
    throw InputError("tally needs at least one class and one group");
  }
}

void VoteTally::Add(std::span<const Label> column, int group,
                    std::int64_t weight) {
  assert(column.size() == rows_ && group >= 0 && group < groups_);
  const std::size_t stride = static_cast<std::size_t>(groups_) * class_count_;
  std::int64_t* base = cells_.data() + static_cast<std::size_t>(group) * class_count_;
  for (std::size_t r = 0; r < rows_; ++r) {
    base[r * stride + column[r]] += weight;
  }
  member_count_[group] += 1;
  weight_sum_[group] += weight;
}

void VoteTally::Remove(std::span<const Label> column, int group,
                       std::int64_t weight) {
  assert(column.size() == rows_ && group >= 0 && group < groups_);
  assert(member_count_[group] > 0);
  const std::size_t stride = static_cast<std::size_t>(groups_) * class_count_;
  std::int64_t* base = cells_.data() + static_cast<std::size_t>(group) * class_count_;
  for (std::size_t r = 0; r < rows_; ++r) {
    base[r * stride + column[r]] -= weight;
  }
  member_count_[group] -= 1;
  weight_sum_[group] -= weight;
}

void VoteTally::Clear() {
  std::fill(cells_.begin(), cells_.end(), 0);
  std::fill(member_count_.begin(), member_count_.end(), 0);
  std::fill(weight_sum_.begin(), weight_sum_.end(), 0);
}

// --- SubsetEvaluator ---------------------------------------------------------

SubsetEvaluator::SubsetEvaluator(const PredictionMatrix& matrix,
                                 std::span<const LearnerCategory> categories,
                                 SubsetScoring scoring)
    : matrix_(matrix),
      scoring_(scoring),
      tally_(matrix.rows(), matrix.class_count(),
             scoring == SubsetScoring::kMajority
                 ? 1
                 : static_cast<int>(kNumCategories)),
      in_set_(matrix.learner_count(), 0) {
  if (categories.size() != matrix.learner_count()) {
    throw InputError("category list does not match the matrix columns");
  }
  group_of_.resize(matrix.learner_count(), 0);
  weight_of_.resize(matrix.learner_count(), 1);
  if (scoring_ != SubsetScoring::kMajority) {
    for (std::size_t j = 0; j < matrix.learner_count(); ++j) {
      group_of_[j] = static_cast<int>(categories[j]);
      // Correct-count is accuracy times the (shared) row count.
      weight_of_[j] = static_cast<std::int64_t>(matrix.CorrectCount(j));
    }
  }
}

void SubsetEvaluator::Add(std::size_t learner) {
  assert(!in_set_[learner]);
  tally_.Add(matrix_.column(learner), group_of_[learner], weight_of_[learner]);
  in_set_[learner] = 1;
  ++member_count_;
}

void SubsetEvaluator::Remove(std::size_t learner) {
  assert(in_set_[learner]);
  tally_.Remove(matrix_.column(learner), group_of_[learner],
                weight_of_[learner]);
  in_set_[learner] = 0;
  --member_count_;
}

void SubsetEvaluator::Clear() {
  tally_.Clear();
  std::fill(in_set_.begin(), in_set_.end(), 0);
  member_count_ = 0;
}

std::size_t SubsetEvaluator::CorrectRows() const {
  if (member_count_ == 0) return 0;
  const int groups = tally_.groups();
  const int classes = tally_.class_count();

  // Per-group multiplier applied to the tallied correct-counts.
  //   WMV:           mean correct-count of the group's members (class weight)
  //   per-category:  1 / summed correct-count of the group
  std::array<double, kNumCategories> factor{};
  bool any_weight = false;
  for (int g = 0; g < groups; ++g) {
    const auto n = tally_.member_count(g);
    const auto s = tally_.weight_sum(g);
    if (n == 0 || s == 0) {
      factor[g] = 0.0;
      continue;
    }
    any_weight = true;
    switch (scoring_) {
      case SubsetScoring::kMajority:
        factor[g] = 1.0;
        break;
      case SubsetScoring::kWmv:
        factor[g] = static_cast<double>(s) / static_cast<double>(n);
        break;
      case SubsetScoring::kWmvPerCategory:
        factor[g] = 1.0 / static_cast<double>(s);
        break;
    }
  }
  // Members with zero weight only: no usable evidence.
  if (!any_weight) return 0;

  const auto gold = matrix_.gold();
  const auto cells = tally_.cells();
  const std::size_t stride = static_cast<std::size_t>(groups) * classes;
  std::vector<double> scores(static_cast<std::size_t>(classes));
  std::size_t correct = 0;
  for (std::size_t r = 0; r < tally_.rows(); ++r) {
    const std::int64_t* row = cells.data() + r * stride;
    for (int c = 0; c < classes; ++c) {
      double s = 0.0;
      for (int g = 0; g < groups; ++g) {
        s += factor[g] * static_cast<double>(row[g * classes + c]);
      }
      scores[c] = s;
    }
    correct += static_cast<std::size_t>(SelectClass(scores) == gold[r]);
  }
  return correct;
}

double SubsetEvaluator::Accuracy() const {
  return static_cast<double>(CorrectRows()) /
         static_cast<double>(matrix_.rows());
}

}  // namespace hec
