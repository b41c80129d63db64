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

#include "hec/prediction_data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hec/errors.hpp"

namespace hec {

namespace {

std::string Located(const std::filesystem::path& path, std::size_t line,
                    std::string_view message) {
  std::ostringstream out;
  out << path.string() << ":" << line << ": " << message;
  return out.str();
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw InputError("cannot write " + path.string());
}

// Splits on '\n'. A single trailing newline does not produce an empty record;
// a trailing '\r' is tolerated and dropped.
std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::optional<std::uint64_t> ParseUnsigned(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::unordered_map<std::string, std::size_t> BuildIndex(
    const std::vector<std::string>& ids) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  return index;
}

}  // namespace

std::string_view CategoryTag(LearnerCategory category) {
  switch (category) {
    case LearnerCategory::kLexicon:
      return "lexicon";
    case LearnerCategory::kBow:
      return "bow";
    case LearnerCategory::kEmbeddingNn:
      return "embedding_nn";
    case LearnerCategory::kTransformer:
      return "transformer";
  }
  return "unknown";
}

std::optional<LearnerCategory> ParseCategory(std::string_view tag) {
  for (const LearnerCategory category : kAllCategories) {
    if (CategoryTag(category) == tag) return category;
  }
  return std::nullopt;
}

std::string_view SplitName(Split split) {
  return split == Split::kValidation ? "validation" : "test";
}

bool IsValidIdentifier(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
  });
}

// --- PredictionMatrix ------------------------------------------------------

PredictionMatrix::PredictionMatrix(Split split, int class_count,
                                   std::vector<std::string> example_ids,
                                   std::vector<Label> gold,
                                   std::vector<std::string> learner_ids,
                                   std::vector<std::vector<Label>> columns)
    : split_(split),
      class_count_(class_count),
      example_ids_(std::move(example_ids)),
      gold_(std::move(gold)),
      learner_ids_(std::move(learner_ids)),
      columns_(std::move(columns)) {
  if (class_count_ < 2) throw InputError("class_count must be at least 2");
  if (gold_.empty()) throw InputError("prediction matrix has no rows");
  if (example_ids_.size() != gold_.size()) {
    throw InputError("example id count differs from gold label count");
  }
  if (learner_ids_.size() != columns_.size()) {
    throw InputError("learner id count differs from column count");
  }
  const auto limit = static_cast<Label>(class_count_);
  std::unordered_set<std::string_view> seen_examples;
  for (const std::string& id : example_ids_) {
    if (!IsValidIdentifier(id)) throw InputError("invalid example id '" + id + "'");
    if (!seen_examples.insert(id).second) {
      throw InputError("duplicate example id '" + id + "'");
    }
  }
  for (const Label label : gold_) {
    if (label >= limit) throw InputError("label out of range");
  }
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (!IsValidIdentifier(learner_ids_[j])) {
      throw InputError("invalid learner id '" + learner_ids_[j] + "'");
    }
    if (columns_[j].size() != gold_.size()) {
      throw InputError("column '" + learner_ids_[j] + "' has wrong length");
    }
    for (const Label label : columns_[j]) {
      if (label >= limit) throw InputError("label out of range");
    }
  }
  index_ = BuildIndex(learner_ids_);
  if (index_.size() != learner_ids_.size()) {
    throw InputError("duplicate learner id");
  }
}

std::span<const Label> PredictionMatrix::column(
    std::string_view learner_id) const {
  return columns_[IndexOf(learner_id)];
}

std::optional<std::size_t> PredictionMatrix::Find(
    std::string_view learner_id) const {
  const auto it = index_.find(std::string(learner_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t PredictionMatrix::IndexOf(std::string_view learner_id) const {
  const auto found = Find(learner_id);
  if (!found) {
    throw InputError("unknown learner id '" + std::string(learner_id) + "'");
  }
  return *found;
}

std::size_t PredictionMatrix::CorrectCount(std::size_t index) const {
  const auto& col = columns_[index];
  std::size_t correct = 0;
  for (std::size_t r = 0; r < gold_.size(); ++r) {
    correct += static_cast<std::size_t>(col[r] == gold_[r]);
  }
  return correct;
}

bool PredictionMatrix::operator==(const PredictionMatrix& other) const {
  return split_ == other.split_ && class_count_ == other.class_count_ &&
         example_ids_ == other.example_ids_ && gold_ == other.gold_ &&
         learner_ids_ == other.learner_ids_ && columns_ == other.columns_;
}

// --- DatasetBundle ---------------------------------------------------------

DatasetBundle::DatasetBundle(std::vector<LearnerMeta> meta,
                             PredictionMatrix validation, PredictionMatrix test)
    : meta_(std::move(meta)),
      validation_(std::move(validation)),
      test_(std::move(test)) {
  if (validation_.split() != Split::kValidation ||
      test_.split() != Split::kTest) {
    throw InputError("bundle splits are mislabelled");
  }
  if (validation_.class_count() != test_.class_count()) {
    throw InputError("class_count differs between splits");
  }
  for (std::size_t i = 0; i < meta_.size(); ++i) {
    if (!IsValidIdentifier(meta_[i].id)) {
      throw InputError("invalid learner id '" + meta_[i].id + "' in meta");
    }
    if (meta_[i].name.find_first_of(",\r\n") != std::string::npos) {
      throw InputError("learner name for '" + meta_[i].id +
                       "' contains a comma or line break");
    }
    if (!meta_index_.emplace(meta_[i].id, i).second) {
      throw InputError("duplicate learner id '" + meta_[i].id + "' in meta");
    }
  }
  const std::set<std::string> val_ids(validation_.learner_ids().begin(),
                                      validation_.learner_ids().end());
  const std::set<std::string> test_ids(test_.learner_ids().begin(),
                                       test_.learner_ids().end());
  if (val_ids != test_ids) throw InputError("learner-id set mismatch");
  for (const std::string& id : val_ids) {
    if (!meta_index_.contains(id)) {
      throw InputError("learner id '" + id + "' missing from meta file");
    }
  }
}

const LearnerMeta& DatasetBundle::MetaFor(std::string_view learner_id) const {
  const auto it = meta_index_.find(std::string(learner_id));
  if (it == meta_index_.end()) {
    throw InputError("unknown learner id '" + std::string(learner_id) + "'");
  }
  return meta_[it->second];
}

bool DatasetBundle::operator==(const DatasetBundle& other) const {
  return meta_ == other.meta_ && validation_ == other.validation_ &&
         test_ == other.test_;
}

// --- CSV I/O -----------------------------------------------------------------

PredictionMatrix ReadPredictionCsv(const std::filesystem::path& path,
                                   Split split, int class_count) {
  const std::string text = ReadFile(path);
  const std::vector<std::string_view> lines = SplitLines(text);
  if (lines.empty()) throw InputError(Located(path, 1, "missing header"));

  const std::vector<std::string_view> header = SplitFields(lines[0]);
  if (header.size() < 2 || header[0] != "example_id" || header[1] != "gold") {
    throw InputError(
        Located(path, 1, "header must start with 'example_id,gold'"));
  }
  std::vector<std::string> learner_ids;
  std::unordered_set<std::string_view> seen;
  for (std::size_t j = 2; j < header.size(); ++j) {
    if (!IsValidIdentifier(header[j])) {
      throw InputError(Located(path, 1, "invalid learner id '" +
                                            std::string(header[j]) + "'"));
    }
    if (!seen.insert(header[j]).second) {
      throw InputError(Located(
          path, 1, "duplicate learner id '" + std::string(header[j]) + "'"));
    }
    learner_ids.emplace_back(header[j]);
  }

  const std::size_t learners = learner_ids.size();
  const std::size_t rows = lines.size() - 1;
  if (rows == 0) throw InputError(Located(path, 2, "no data rows"));
  std::vector<std::string> example_ids;
  std::vector<Label> gold;
  std::vector<std::vector<Label>> columns(learners);
  example_ids.reserve(rows);
  gold.reserve(rows);
  for (auto& col : columns) col.reserve(rows);

  std::unordered_set<std::string_view> seen_examples;
  const auto limit = static_cast<std::uint64_t>(class_count);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t line_no = r + 2;
    const std::vector<std::string_view> fields = SplitFields(lines[r + 1]);
    if (fields.size() != learners + 2) {
      throw InputError(Located(path, line_no,
                               "malformed CSV: expected " +
                                   std::to_string(learners + 2) +
                                   " fields, found " +
                                   std::to_string(fields.size())));
    }
    if (!IsValidIdentifier(fields[0])) {
      throw InputError(Located(path, line_no, "invalid example id"));
    }
    if (!seen_examples.insert(fields[0]).second) {
      throw InputError(Located(path, line_no,
                               "duplicate example id '" +
                                   std::string(fields[0]) + "'"));
    }
    example_ids.emplace_back(fields[0]);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      const auto value = ParseUnsigned(fields[f]);
      if (!value) {
        throw InputError(Located(path, line_no,
                                 "malformed CSV: '" + std::string(fields[f]) +
                                     "' is not a non-negative integer"));
      }
      if (*value >= limit) {
        throw InputError(Located(path, line_no,
                                 "label out of range: " +
                                     std::string(fields[f]) +
                                     " >= class_count " +
                                     std::to_string(class_count)));
      }
      const auto label = static_cast<Label>(*value);
      if (f == 1) {
        gold.push_back(label);
      } else {
        columns[f - 2].push_back(label);
      }
    }
  }
  try {
    return PredictionMatrix(split, class_count, std::move(example_ids),
                            std::move(gold), std::move(learner_ids),
                            std::move(columns));
  } catch (const InputError& e) {
    throw InputError(Located(path, 1, e.what()));
  }
}

std::vector<LearnerMeta> ReadMetaCsv(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  const std::vector<std::string_view> lines = SplitLines(text);
  if (lines.empty() || lines[0] != "learner_id,name,category") {
    throw InputError(
        Located(path, 1, "header must be 'learner_id,name,category'"));
  }
  std::vector<LearnerMeta> meta;
  std::unordered_set<std::string_view> seen;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t line_no = r + 1;
    const std::vector<std::string_view> fields = SplitFields(lines[r]);
    if (fields.size() != 3) {
      throw InputError(Located(path, line_no,
                               "malformed CSV: expected 3 fields, found " +
                                   std::to_string(fields.size())));
    }
    if (!IsValidIdentifier(fields[0])) {
      throw InputError(Located(path, line_no, "invalid learner id"));
    }
    if (!seen.insert(fields[0]).second) {
      throw InputError(Located(path, line_no,
                               "duplicate learner id '" +
                                   std::string(fields[0]) + "'"));
    }
    const auto category = ParseCategory(fields[2]);
    if (!category) {
      throw InputError(Located(
          path, line_no, "unknown category '" + std::string(fields[2]) + "'"));
    }
    meta.push_back(
        LearnerMeta{std::string(fields[0]), std::string(fields[1]), *category});
  }
  return meta;
}

DatasetBundle LoadBundle(const std::filesystem::path& validation_path,
                         const std::filesystem::path& test_path,
                         const std::filesystem::path& meta_path,
                         int class_count) {
  if (class_count < 2) throw InputError("class_count must be at least 2");
  PredictionMatrix validation =
      ReadPredictionCsv(validation_path, Split::kValidation, class_count);
  PredictionMatrix test = ReadPredictionCsv(test_path, Split::kTest, class_count);
  std::vector<LearnerMeta> meta = ReadMetaCsv(meta_path);

  const std::set<std::string> val_ids(validation.learner_ids().begin(),
                                      validation.learner_ids().end());
  const std::set<std::string> test_ids(test.learner_ids().begin(),
                                       test.learner_ids().end());
  if (val_ids != test_ids) {
    std::string detail;
    for (const auto& id : test_ids) {
      if (!val_ids.contains(id)) detail = "'" + id + "' absent from validation";
    }
    for (const auto& id : val_ids) {
      if (!test_ids.contains(id)) detail = "'" + id + "' absent from test";
    }
    throw InputError(
        Located(test_path, 1, "learner-id set mismatch: " + detail));
  }
  std::unordered_set<std::string> meta_ids;
  for (const auto& m : meta) meta_ids.insert(m.id);
  for (const auto& id : validation.learner_ids()) {
    if (!meta_ids.contains(id)) {
      throw InputError(Located(validation_path, 1,
                               "learner id '" + id +
                                   "' missing from meta file " +
                                   meta_path.string()));
    }
  }
  return DatasetBundle(std::move(meta), std::move(validation), std::move(test));
}

std::string FormatPredictionCsv(const PredictionMatrix& matrix) {
  std::string out = "example_id,gold";
  for (const auto& id : matrix.learner_ids()) {
    out += ',';
    out += id;
  }
  out += '\n';
  const auto gold = matrix.gold();
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out += matrix.example_ids()[r];
    out += ',';
    out += std::to_string(gold[r]);
    for (std::size_t j = 0; j < matrix.learner_count(); ++j) {
      out += ',';
      out += std::to_string(matrix.column(j)[r]);
    }
    out += '\n';
  }
  return out;
}

std::string FormatMetaCsv(std::span<const LearnerMeta> meta) {
  std::string out = "learner_id,name,category\n";
  for (const auto& m : meta) {
    out += m.id;
    out += ',';
    out += m.name;
    out += ',';
    out += CategoryTag(m.category);
    out += '\n';
  }
  return out;
}

void EmitBundle(const DatasetBundle& bundle,
                const std::filesystem::path& validation_path,
                const std::filesystem::path& test_path,
                const std::filesystem::path& meta_path) {
  WriteFile(validation_path, FormatPredictionCsv(bundle.validation()));
  WriteFile(test_path, FormatPredictionCsv(bundle.test()));
  WriteFile(meta_path, FormatMetaCsv(bundle.meta()));
}

// --- Accuracy and ranking ----------------------------------------------------

double LearnerAccuracy(const PredictionMatrix& matrix,
                       std::string_view learner_id) {
  const std::size_t index = matrix.IndexOf(learner_id);
  return static_cast<double>(matrix.CorrectCount(index)) /
         static_cast<double>(matrix.rows());
}

std::vector<std::string> RankLearners(const DatasetBundle& bundle) {
  return RankLearners(bundle, bundle.validation().learner_ids());
}

std::vector<std::string> RankLearners(const DatasetBundle& bundle,
                                      std::span<const std::string> pool) {
  const PredictionMatrix& validation = bundle.validation();
  struct Entry {
    std::size_t correct;
    const std::string* id;
  };
  std::vector<Entry> entries;
  entries.reserve(pool.size());
  for (const std::string& id : pool) {
    entries.push_back({validation.CorrectCount(validation.IndexOf(id)), &id});
  }
  // Integer correct counts over the same row count order exactly like the
  // accuracies themselves.
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.correct != b.correct) return a.correct > b.correct;
    return *a.id < *b.id;
  });
  std::vector<std::string> ranked;
  ranked.reserve(entries.size());
  for (const Entry& e : entries) ranked.push_back(*e.id);
  return ranked;
}

}  // namespace hec
