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

#include "hec/errors.hpp"
#include "hec/metrics.hpp"

namespace hec {

std::optional<double> GapEliminated(double acc_b, double acc_a) {
  if (!(acc_a < 1.0)) return std::nullopt;
  return (acc_b - acc_a) / (1.0 - acc_a);
}

Dispersion CrossDatasetStats(std::span<const double> values) {
  if (values.size() < 2) {
    throw InputError("dispersion needs at least two datasets");
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / n;
  double squares = 0.0;
  for (const double v : values) squares += (v - mean) * (v - mean);
  return {mean, std::sqrt(squares / (n - 1.0)), values.size()};
}

ComparisonReport BuildReport(std::vector<MethodResult> results,
                             std::string reference_method) {
  ComparisonReport report;
  report.results = std::move(results);
  report.reference_method = std::move(reference_method);

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_method;
  for (const auto& r : report.results) {
    auto& values = by_method[r.method];
    if (values.empty()) order.push_back(r.method);
    values.push_back(r.test_accuracy);
  }
  std::map<std::string, double> mean_of;
  for (const auto& method : order) {
    const auto& values = by_method[method];
    MethodSummary summary;
    summary.method = method;
    summary.datasets = values.size();
    if (values.size() >= 2) {
      const Dispersion d = CrossDatasetStats(values);
      summary.mean_test_accuracy = d.mean;
      summary.stddev_test_accuracy = d.stddev;
    } else {
      summary.mean_test_accuracy = values.front();
    }
    mean_of[method] = summary.mean_test_accuracy;
    report.summaries.push_back(std::move(summary));
  }

  const auto reference = mean_of.find(report.reference_method);
  if (reference != mean_of.end()) {
    for (const auto& method : order) {
      if (method == report.reference_method) continue;
      report.gaps.push_back({method, report.reference_method,
                             GapEliminated(mean_of[method], reference->second)});
    }
  }
  return report;
}

}  // namespace hec
