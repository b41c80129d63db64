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
#include <cstdio>
#include <fstream>
#include <map>

#include "hec/errors.hpp"
#include "hec/metrics.hpp"
#include "json.hpp"

namespace hec {

namespace {

using nlohmann::ordered_json;

std::string Fixed4(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

std::string JoinMembers(const std::vector<std::string>& members) {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i > 0) out += '|';
    out += members[i];
  }
  return out;
}

std::string FormatCsv(const ComparisonReport& report) {
  std::string out =
      "dataset,method,val_accuracy,test_accuracy,ensemble_size,members\n";
  for (const auto& r : report.results) {
    out += r.dataset + ',' + r.method + ',' + Fixed4(r.validation_accuracy) +
           ',' + Fixed4(r.test_accuracy) + ',' +
           std::to_string(r.ensemble_size) + ',' + JoinMembers(r.members) +
           '\n';
  }
  return out;
}

ordered_json OptionalNumber(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string FormatJson(const ComparisonReport& report) {
  ordered_json doc;
  doc["reference_method"] = report.reference_method;
  ordered_json results = ordered_json::array();
  for (const auto& r : report.results) {
    ordered_json e;
    e["dataset"] = r.dataset;
    e["method"] = r.method;
    e["val_accuracy"] = r.validation_accuracy;
    e["test_accuracy"] = r.test_accuracy;
    e["ensemble_size"] = r.ensemble_size;
    e["members"] = r.members;
    results.push_back(std::move(e));
  }
  doc["results"] = std::move(results);
  ordered_json summaries = ordered_json::array();
  for (const auto& s : report.summaries) {
    ordered_json e;
    e["method"] = s.method;
    e["mean_test_accuracy"] = s.mean_test_accuracy;
    e["stddev_test_accuracy"] = OptionalNumber(s.stddev_test_accuracy);
    e["datasets"] = s.datasets;
    summaries.push_back(std::move(e));
  }
  doc["summaries"] = std::move(summaries);
  ordered_json gaps = ordered_json::array();
  for (const auto& g : report.gaps) {
    ordered_json e;
    e["method"] = g.method;
    e["reference"] = g.reference;
    e["gap_eliminated"] = OptionalNumber(g.gap);
    gaps.push_back(std::move(e));
  }
  doc["gaps"] = std::move(gaps);
  return doc.dump(2) + "\n";
}

std::string FormatMarkdown(const ComparisonReport& report) {
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& r : report.results) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    cell[{r.dataset, r.method}] = r.test_accuracy;
  }

  std::string out = "| Dataset |";
  for (const auto& m : methods) out += " " + m + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) out += "---|";
  out += '\n';
  if (report.results.empty()) return out;

  for (const auto& d : datasets) {
    out += "| " + d + " |";
    for (const auto& m : methods) {
      const auto it = cell.find({d, m});
      out += " " + (it == cell.end() ? std::string("-") : Fixed4(it->second)) +
             " |";
    }
    out += '\n';
  }
  std::map<std::string, const MethodSummary*> summary_of;
  for (const auto& s : report.summaries) summary_of[s.method] = &s;
  out += "| Average |";
  for (const auto& m : methods) {
    out += " " + Fixed4(summary_of.at(m)->mean_test_accuracy) + " |";
  }
  out += "\n| Std |";
  for (const auto& m : methods) {
    const auto& sd = summary_of.at(m)->stddev_test_accuracy;
    out += " " + (sd ? Fixed4(*sd) : std::string("-")) + " |";
  }
  out += '\n';
  return out;
}

std::optional<double> ReadOptional(const ordered_json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

std::string FormatReport(const ComparisonReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv:
      return FormatCsv(report);
    case ReportFormat::kJson:
      return FormatJson(report);
    case ReportFormat::kMarkdown:
      return FormatMarkdown(report);
  }
  return {};
}

void EmitReport(const ComparisonReport& report, ReportFormat format,
                const std::filesystem::path& path) {
  const std::string text = FormatReport(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write report to " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("cannot write report to " + path.string());
}

ComparisonReport ParseReportJson(std::string_view json_text) {
  ComparisonReport report;
  try {
    const ordered_json doc = ordered_json::parse(json_text);
    report.reference_method = doc.at("reference_method").get<std::string>();
    for (const auto& e : doc.at("results")) {
      MethodResult r;
      r.dataset = e.at("dataset").get<std::string>();
      r.method = e.at("method").get<std::string>();
      r.validation_accuracy = e.at("val_accuracy").get<double>();
      r.test_accuracy = e.at("test_accuracy").get<double>();
      r.ensemble_size = e.at("ensemble_size").get<std::size_t>();
      r.members = e.at("members").get<std::vector<std::string>>();
      report.results.push_back(std::move(r));
    }
    for (const auto& e : doc.at("summaries")) {
      MethodSummary s;
      s.method = e.at("method").get<std::string>();
      s.mean_test_accuracy = e.at("mean_test_accuracy").get<double>();
      s.stddev_test_accuracy = ReadOptional(e.at("stddev_test_accuracy"));
      s.datasets = e.at("datasets").get<std::size_t>();
      report.summaries.push_back(std::move(s));
    }
    for (const auto& e : doc.at("gaps")) {
      GapEntry g;
      g.method = e.at("method").get<std::string>();
      g.reference = e.at("reference").get<std::string>();
      g.gap = ReadOptional(e.at("gap_eliminated"));
      report.gaps.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report JSON: ") + e.what());
  }
  return report;
}

}  // namespace hec
