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

// Accuracy summaries and the comparison report.

#ifndef HEC_METRICS_HPP_
#define HEC_METRICS_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hec {

// Share of the distance to perfect accuracy that B closes relative to A:
// (acc_b - acc_a) / (1 - acc_a). Negative when B is worse. Undefined (nullopt)
// when acc_a is 1.
std::optional<double> GapEliminated(double acc_b, double acc_a);

struct Dispersion {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) convention
  std::size_t count = 0;

  bool operator==(const Dispersion&) const = default;
};

// Throws InputError for fewer than two values.
Dispersion CrossDatasetStats(std::span<const double> values);

struct MethodResult {
  std::string dataset;
  std::string method;
  double validation_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t ensemble_size = 0;
  std::vector<std::string> members;

  bool operator==(const MethodResult&) const = default;
};

struct MethodSummary {
  std::string method;
  double mean_test_accuracy = 0.0;
  // Present with at least two datasets.
  std::optional<double> stddev_test_accuracy;
  std::size_t datasets = 0;

  bool operator==(const MethodSummary&) const = default;
};

// Gap closed by `method` relative to `reference`, on cross-dataset mean test
// accuracy. `gap` is empty when the reference is already perfect.
struct GapEntry {
  std::string method;
  std::string reference;
  std::optional<double> gap;

  bool operator==(const GapEntry&) const = default;
};

struct ComparisonReport {
  std::vector<MethodResult> results;
  std::string reference_method;
  std::vector<MethodSummary> summaries;  // methods in order of first appearance
  std::vector<GapEntry> gaps;

  bool operator==(const ComparisonReport&) const = default;
};

inline constexpr std::string_view kDefaultReferenceMethod = "best-single";

// Derives summaries and gap entries from `results`.
ComparisonReport BuildReport(std::vector<MethodResult> results,
                             std::string reference_method =
                                 std::string(kDefaultReferenceMethod));

enum class ReportFormat { kCsv, kJson, kMarkdown };

// CSV:      dataset,method,val_accuracy,test_accuracy,ensemble_size,members
//           accuracies at 4 decimals, members joined by '|'
// JSON:     the full report; doubles written in shortest round-trip form
// Markdown: datasets as rows and methods as columns (test accuracy), followed
//           by Average and Std rows
std::string FormatReport(const ComparisonReport& report, ReportFormat format);

// Throws InputError if the file cannot be written.
void EmitReport(const ComparisonReport& report, ReportFormat format,
                const std::filesystem::path& path);

// Inverse of the JSON format. Throws InputError on malformed input.
ComparisonReport ParseReportJson(std::string_view json_text);

}  // namespace hec

#endif  // HEC_METRICS_HPP_
