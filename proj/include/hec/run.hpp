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

// Reproducible runs: one loaded bundle, a candidate pool, any subset of the
// construction methods, and a comparison report on the test split.

#ifndef HEC_RUN_HPP_
#define HEC_RUN_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hec/baselines.hpp"
#include "hec/hec.hpp"
#include "hec/metrics.hpp"

namespace hec {

enum class PoolKind : std::uint8_t { kAll, kTransformers, kIds };

struct CandidatePool {
  PoolKind kind = PoolKind::kAll;
  std::vector<std::string> ids;  // for kIds
};

// Learner ids of the pool, in validation column order. Throws InputError for
// unknown ids or an empty result.
std::vector<std::string> SelectPool(const DatasetBundle& bundle,
                                    const CandidatePool& pool);

inline const std::vector<std::string>& KnownMethods() {
  static const std::vector<std::string> kMethods = {
      "hec",    "wmv",      "stacking",   "shapley",
      "bayes",  "random",   "majority",   "best-single"};
  return kMethods;
}

struct RunConfig {
  std::filesystem::path validation_path;
  std::filesystem::path test_path;
  std::filesystem::path meta_path;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> trace_path;
  std::string dataset;  // report label; derived from the validation path if empty
  int class_count = 0;
  std::vector<std::string> methods = {"hec"};
  CandidatePool pool;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;

  HecConfig hec;  // master_seed and threads are overwritten from the run
  WmvNormalization wmv_normalization = WmvNormalization::kGlobal;
  StackingParams stacking;
  ShapleyMethod shapley_method = ShapleyMethod::kMonteCarlo;
  std::size_t shapley_samples = 1000;
  ShapleyGame shapley_game = ShapleyGame::kMajority;
  double bayes_alpha = 1.0;
  std::size_t random_trials = 5;
  double random_p = 0.5;

  // Throws InputError when a field is out of range or a file is missing.
  void Validate() const;
};

// Builds a RunConfig from option values keyed by long flag name (without the
// leading dashes): JSON config entries first, then explicit flags on top.
// Boolean flags map to "true"/"false".
RunConfig MakeRunConfig(const std::map<std::string, std::string>& options);

// Parses a JSON config object into the same option map.
std::map<std::string, std::string> ReadConfigOptions(
    const std::filesystem::path& path);

// Seed of one method's stream, derived from the master seed and a fixed tag
// per method so that adding methods never perturbs the others.
std::uint64_t MethodSeed(std::uint64_t master_seed, std::string_view method);

struct RunOutcome {
  ComparisonReport report;
  std::vector<TraceRecord> trace;
};

// Loads the bundle, runs every selected method and returns the report.
RunOutcome ExecuteRun(const RunConfig& config);
RunOutcome ExecuteRun(const RunConfig& config, const DatasetBundle& bundle);

// Writes report.csv, report.json and report.md into the output directory, and
// the trace CSV when requested.
void WriteRunOutputs(const RunConfig& config, const RunOutcome& outcome);

// seed_index,candidate_id,delta_e,temperature,u,accepted
std::string FormatTraceCsv(const std::vector<TraceRecord>& trace);

struct BenchReport {
  double wall_seconds = 0.0;
  std::uint64_t seeds = 0;
  std::uint64_t evaluations = 0;
  double evaluations_per_second = 0.0;
  std::size_t threads = 1;
  double validation_score = 0.0;
  std::vector<std::string> members;
};

BenchReport ExecuteBench(const RunConfig& config);
std::string FormatBenchReport(const BenchReport& report);

// Command-line entry point: `hec run|synth|bench ...`. Returns the process
// exit status (0 ok, 1 input error, 2 computation error).
int RunCli(int argc, const char* const* argv);

}  // namespace hec

#endif  // HEC_RUN_HPP_
