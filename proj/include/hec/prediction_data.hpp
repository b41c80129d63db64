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

// Prediction matrices: gold labels plus one hard-label column per
// base-learner, for the validation and test splits of one dataset.
//
// File formats (UTF-8, LF line endings, no quoting):
//
//   prediction CSV  example_id,gold,<learner_id_1>,...,<learner_id_n>
//   meta CSV        learner_id,name,category
//
// Identifiers are restricted to [A-Za-z0-9_.-]+. The class count is not
// inferred from the files; it is supplied by the caller and every label is
// validated against it.

#ifndef HEC_PREDICTION_DATA_HPP_
#define HEC_PREDICTION_DATA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hec {

// Class index in [0, class_count). Binary sentiment uses 0 = negative,
// 1 = positive.
using Label = std::uint32_t;

enum class LearnerCategory : std::uint8_t {
  kLexicon = 0,
  kBow = 1,
  kEmbeddingNn = 2,
  kTransformer = 3,
};

inline constexpr std::size_t kNumCategories = 4;
inline constexpr std::array<LearnerCategory, kNumCategories> kAllCategories = {
    LearnerCategory::kLexicon, LearnerCategory::kBow,
    LearnerCategory::kEmbeddingNn, LearnerCategory::kTransformer};

std::string_view CategoryTag(LearnerCategory category);
std::optional<LearnerCategory> ParseCategory(std::string_view tag);

struct LearnerMeta {
  std::string id;
  std::string name;
  LearnerCategory category = LearnerCategory::kLexicon;

  bool operator==(const LearnerMeta&) const = default;
};

enum class Split : std::uint8_t { kValidation, kTest };

std::string_view SplitName(Split split);

// True iff `id` is non-empty and matches [A-Za-z0-9_.-]+.
bool IsValidIdentifier(std::string_view id);

// Immutable table of gold labels and learner predictions for one split.
// The constructor enforces every structural invariant and throws InputError.
class PredictionMatrix {
 public:
  PredictionMatrix(Split split, int class_count,
                   std::vector<std::string> example_ids, std::vector<Label> gold,
                   std::vector<std::string> learner_ids,
                   std::vector<std::vector<Label>> columns);

  Split split() const { return split_; }
  int class_count() const { return class_count_; }
  std::size_t rows() const { return gold_.size(); }
  std::size_t learner_count() const { return learner_ids_.size(); }

  const std::vector<std::string>& example_ids() const { return example_ids_; }
  std::span<const Label> gold() const { return gold_; }
  const std::vector<std::string>& learner_ids() const { return learner_ids_; }

  std::span<const Label> column(std::size_t index) const {
    return columns_[index];
  }
  // Throws InputError for an unknown id.
  std::span<const Label> column(std::string_view learner_id) const;

  std::optional<std::size_t> Find(std::string_view learner_id) const;
  // Like Find, but throws InputError("unknown learner id ...").
  std::size_t IndexOf(std::string_view learner_id) const;

  // Number of rows where the column agrees with gold.
  std::size_t CorrectCount(std::size_t index) const;

  bool operator==(const PredictionMatrix& other) const;

 private:
  Split split_;
  int class_count_;
  std::vector<std::string> example_ids_;
  std::vector<Label> gold_;
  std::vector<std::string> learner_ids_;
  std::vector<std::vector<Label>> columns_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Learner metadata plus both splits. Validation and test must carry the same
// learner-id set and class count, and every learner must appear in `meta`.
class DatasetBundle {
 public:
  DatasetBundle(std::vector<LearnerMeta> meta, PredictionMatrix validation,
                PredictionMatrix test);

  const std::vector<LearnerMeta>& meta() const { return meta_; }
  const PredictionMatrix& validation() const { return validation_; }
  const PredictionMatrix& test() const { return test_; }
  int class_count() const { return validation_.class_count(); }

  // Throws InputError for an unknown id.
  const LearnerMeta& MetaFor(std::string_view learner_id) const;

  bool operator==(const DatasetBundle& other) const;

 private:
  std::vector<LearnerMeta> meta_;
  PredictionMatrix validation_;
  PredictionMatrix test_;
  std::unordered_map<std::string, std::size_t> meta_index_;
};

PredictionMatrix ReadPredictionCsv(const std::filesystem::path& path,
                                   Split split, int class_count);
std::vector<LearnerMeta> ReadMetaCsv(const std::filesystem::path& path);

DatasetBundle LoadBundle(const std::filesystem::path& validation_path,
                         const std::filesystem::path& test_path,
                         const std::filesystem::path& meta_path,
                         int class_count);

std::string FormatPredictionCsv(const PredictionMatrix& matrix);
std::string FormatMetaCsv(std::span<const LearnerMeta> meta);

// Writes the three CSV files. Inverse of LoadBundle, byte for byte.
void EmitBundle(const DatasetBundle& bundle,
                const std::filesystem::path& validation_path,
                const std::filesystem::path& test_path,
                const std::filesystem::path& meta_path);

// Fraction of rows where the learner's column equals gold.
double LearnerAccuracy(const PredictionMatrix& matrix,
                       std::string_view learner_id);

// Learner ids by validation accuracy, descending; ties by ascending id.
std::vector<std::string> RankLearners(const DatasetBundle& bundle);
// Same ordering restricted to `pool`.
std::vector<std::string> RankLearners(const DatasetBundle& bundle,
                                      std::span<const std::string> pool);

// --- Synthetic bundles -----------------------------------------------------

struct SyntheticLearner {
  std::string id;
  std::string name;  // defaults to id when empty
  LearnerCategory category = LearnerCategory::kBow;
  double target_accuracy = 0.5;
  std::optional<std::string> correlation_group;
  double within_group_agreement = 0.0;
};

struct SyntheticSpec {
  int class_count = 2;
  std::size_t example_count = 0;
  // Test rows; 0 means the same as example_count.
  std::size_t test_example_count = 0;
  std::vector<SyntheticLearner> learners;
  std::uint64_t rng_seed = 0;
};

// Gold labels are uniform over classes. A learner is correct on a row iff its
// uniform draw falls below target_accuracy; otherwise it emits a uniformly
// chosen wrong label. Learners of one correlation group take the group's
// shared (draw, wrong label) event with probability within_group_agreement
// and their own event otherwise, so marginal accuracy is unaffected by the
// grouping.
DatasetBundle GenerateSynthetic(const SyntheticSpec& spec);

// JSON form used by `hec synth`:
// {"class_count":2,"example_count":1000,"test_example_count":1000,
//  "rng_seed":7,"learners":[{"id":"a","name":"A","category":"bow",
//  "target_accuracy":0.8,"correlation_group":"g","within_group_agreement":0.5}]}
SyntheticSpec ParseSyntheticSpec(std::string_view json_text);
std::string SyntheticSpecToJson(const SyntheticSpec& spec);

}  // namespace hec

#endif  // HEC_PREDICTION_DATA_HPP_
