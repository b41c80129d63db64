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

#include <cmath>
#include <map>
#include <set>

#include "hec/errors.hpp"
#include "hec/prediction_data.hpp"
#include "hec/rng.hpp"
#include "json.hpp"

namespace hec {

namespace {

constexpr std::uint64_t kGoldStream = 0;
constexpr std::uint64_t kGroupStreamBase = 1;
constexpr std::uint64_t kLearnerStreamBase = std::uint64_t{1} << 32;

bool IsProbability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void ValidateSpec(const SyntheticSpec& spec) {
  if (spec.class_count < 2) throw InputError("class_count must be at least 2");
  if (spec.example_count == 0) throw InputError("example_count must be >= 1");
  if (spec.learners.empty()) throw InputError("synthetic spec has no learners");
  std::set<std::string> ids;
  for (const auto& l : spec.learners) {
    if (!IsValidIdentifier(l.id)) {
      throw InputError("invalid learner id '" + l.id + "'");
    }
    if (!ids.insert(l.id).second) {
      throw InputError("duplicate learner id '" + l.id + "'");
    }
    if (!IsProbability(l.target_accuracy)) {
      throw InputError("invalid probability: target_accuracy of '" + l.id +
                       "' must lie in [0,1]");
    }
    if (!IsProbability(l.within_group_agreement)) {
      throw InputError("invalid probability: within_group_agreement of '" +
                       l.id + "' must lie in [0,1]");
    }
    if (l.correlation_group && !IsValidIdentifier(*l.correlation_group)) {
      throw InputError("invalid correlation group for '" + l.id + "'");
    }
  }
}

PredictionMatrix GenerateSplit(const SyntheticSpec& spec, Split split,
                               std::size_t rows,
                               const std::vector<int>& group_of) {
  const std::uint64_t tag = split == Split::kValidation
                                ? stream_tag::kSyntheticValidation
                                : stream_tag::kSyntheticTest;
  const auto classes = static_cast<std::uint64_t>(spec.class_count);
  const std::size_t learners = spec.learners.size();
  int group_count = 0;
  for (const int g : group_of) group_count = std::max(group_count, g + 1);

  Rng gold_rng(DeriveStream(spec.rng_seed, tag, kGoldStream));
  std::vector<Rng> group_rngs;
  for (int g = 0; g < group_count; ++g) {
    group_rngs.emplace_back(DeriveStream(spec.rng_seed, tag,
                                         kGroupStreamBase + g));
  }
  std::vector<Rng> learner_rngs;
  for (std::size_t j = 0; j < learners; ++j) {
    learner_rngs.emplace_back(
        DeriveStream(spec.rng_seed, tag, kLearnerStreamBase + j));
  }

  std::vector<std::string> example_ids(rows);
  std::vector<Label> gold(rows);
  std::vector<std::vector<Label>> columns(learners, std::vector<Label>(rows));
  std::vector<double> shared_u(group_count);
  std::vector<std::uint64_t> shared_offset(group_count);

  const char* prefix = split == Split::kValidation ? "v" : "t";
  for (std::size_t r = 0; r < rows; ++r) {
    example_ids[r] = prefix + std::to_string(r);
    gold[r] = static_cast<Label>(gold_rng.Below(classes));
    // Every stream consumes a fixed number of draws per row so that changing
    // one learner's parameters never shifts another learner's stream.
    for (int g = 0; g < group_count; ++g) {
      shared_u[g] = group_rngs[g].Uniform();
      shared_offset[g] = group_rngs[g].Below(classes - 1);
    }
    for (std::size_t j = 0; j < learners; ++j) {
      const SyntheticLearner& spec_l = spec.learners[j];
      Rng& rng = learner_rngs[j];
      const double blend = rng.Uniform();
      double u = rng.Uniform();
      std::uint64_t offset = rng.Below(classes - 1);
      const int g = group_of[j];
      if (g >= 0 && blend < spec_l.within_group_agreement) {
        u = shared_u[g];
        offset = shared_offset[g];
      }
      columns[j][r] =
          u < spec_l.target_accuracy
              ? gold[r]
              : static_cast<Label>((gold[r] + 1 + offset) % classes);
    }
  }

  std::vector<std::string> learner_ids;
  learner_ids.reserve(learners);
  for (const auto& l : spec.learners) learner_ids.push_back(l.id);
  return PredictionMatrix(split, spec.class_count, std::move(example_ids),
                          std::move(gold), std::move(learner_ids),
                          std::move(columns));
}

}  // namespace

DatasetBundle GenerateSynthetic(const SyntheticSpec& spec) {
  ValidateSpec(spec);
  // Groups are numbered by first appearance.
  std::map<std::string, int> group_ids;
  std::vector<int> group_of;
  for (const auto& l : spec.learners) {
    if (!l.correlation_group) {
      group_of.push_back(-1);
      continue;
    }
    const auto [it, inserted] = group_ids.emplace(
        *l.correlation_group, static_cast<int>(group_ids.size()));
    group_of.push_back(it->second);
  }
  const std::size_t test_rows =
      spec.test_example_count == 0 ? spec.example_count : spec.test_example_count;

  std::vector<LearnerMeta> meta;
  for (const auto& l : spec.learners) {
    meta.push_back({l.id, l.name.empty() ? l.id : l.name, l.category});
  }
  return DatasetBundle(
      std::move(meta),
      GenerateSplit(spec, Split::kValidation, spec.example_count, group_of),
      GenerateSplit(spec, Split::kTest, test_rows, group_of));
}

SyntheticSpec ParseSyntheticSpec(std::string_view json_text) {
  using nlohmann::json;
  SyntheticSpec spec;
  try {
    const json doc = json::parse(json_text);
    spec.class_count = doc.at("class_count").get<int>();
    spec.example_count = doc.at("example_count").get<std::size_t>();
    spec.test_example_count = doc.value("test_example_count", std::size_t{0});
    spec.rng_seed = doc.value("rng_seed", std::uint64_t{0});
    for (const json& entry : doc.at("learners")) {
      SyntheticLearner l;
      l.id = entry.at("id").get<std::string>();
      l.name = entry.value("name", std::string());
      const std::string tag = entry.at("category").get<std::string>();
      const auto category = ParseCategory(tag);
      if (!category) throw InputError("unknown category '" + tag + "'");
      l.category = *category;
      l.target_accuracy = entry.at("target_accuracy").get<double>();
      if (entry.contains("correlation_group") &&
          !entry.at("correlation_group").is_null()) {
        l.correlation_group = entry.at("correlation_group").get<std::string>();
      }
      l.within_group_agreement = entry.value("within_group_agreement", 0.0);
      spec.learners.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid synthetic spec: ") + e.what());
  }
  ValidateSpec(spec);
  return spec;
}

std::string SyntheticSpecToJson(const SyntheticSpec& spec) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["class_count"] = spec.class_count;
  doc["example_count"] = spec.example_count;
  doc["test_example_count"] = spec.test_example_count;
  doc["rng_seed"] = spec.rng_seed;
  ordered_json learners = ordered_json::array();
  for (const auto& l : spec.learners) {
    ordered_json entry;
    entry["id"] = l.id;
    if (!l.name.empty()) entry["name"] = l.name;
    entry["category"] = std::string(CategoryTag(l.category));
    entry["target_accuracy"] = l.target_accuracy;
    if (l.correlation_group) entry["correlation_group"] = *l.correlation_group;
    entry["within_group_agreement"] = l.within_group_agreement;
    learners.push_back(std::move(entry));
  }
  doc["learners"] = std::move(learners);
  return doc.dump(2) + "\n";
}

}  // namespace hec
