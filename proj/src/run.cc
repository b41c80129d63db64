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

#include "hec/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hec/errors.hpp"
#include "hec/rng.hpp"
#include "json.hpp"

namespace hec {

namespace {

const std::set<std::string>& KnownOptionKeys() {
  static const std::set<std::string> kKeys = {
      "val",          "test",          "meta",          "classes",
      "method",       "pool",          "out",           "seed",
      "threads",      "greedy",        "s-max",         "t-init",
      "t-min",        "cooling-rate",  "wmv-literal-eq3", "search-rule",
      "shapley-method", "shapley-samples", "shapley-game", "stack-lr",
      "stack-epochs", "stack-l2",      "bayes-alpha",   "random-trials",
      "random-p",     "trace",         "dataset"};
  return kKeys;
}

std::string OptionError(std::string_view key, std::string_view value,
                        std::string_view expected) {
  return "--" + std::string(key) + ": '" + std::string(value) + "' is not " +
         std::string(expected);
}

double ToDouble(std::string_view key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() ||
      !std::isfinite(out)) {
    throw InputError(OptionError(key, value, "a finite number"));
  }
  return out;
}

std::uint64_t ToUnsigned(std::string_view key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw InputError(OptionError(key, value, "a non-negative integer"));
  }
  return out;
}

bool ToBool(std::string_view key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InputError(OptionError(key, value, "a boolean"));
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double Accuracy(std::span<const Label> predictions, std::span<const Label> gold) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < gold.size(); ++r) {
    correct += static_cast<std::size_t>(predictions[r] == gold[r]);
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

MethodResult FromSolution(const std::string& dataset, const std::string& method,
                          const DatasetBundle& bundle,
                          const EnsembleSolution& solution) {
  MethodResult r;
  r.dataset = dataset;
  r.method = method;
  r.validation_accuracy = solution.validation_score;
  r.test_accuracy = EvaluateEnsemble(bundle.test(), solution.members, solution.rule);
  r.ensemble_size = solution.members.size();
  r.members = solution.members;
  return r;
}

std::string DatasetLabel(const RunConfig& config) {
  if (!config.dataset.empty()) return config.dataset;
  const auto parent = config.validation_path.parent_path().filename().string();
  if (!parent.empty() && parent != "." && parent != "..") return parent;
  return config.validation_path.stem().string();
}

std::string Exact17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("cannot write " + path.string());
}

}  // namespace

void RunConfig::Validate() const {
  for (const auto* path : {&validation_path, &test_path, &meta_path}) {
    if (path->empty()) throw InputError("--val, --test and --meta are required");
    if (!std::filesystem::is_regular_file(*path)) {
      throw InputError("file not found: " + path->string());
    }
  }
  if (class_count < 2) throw InputError("--classes must be at least 2");
  if (methods.empty()) throw InputError("--method lists no methods");
  for (const auto& m : methods) {
    const auto& known = KnownMethods();
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw InputError("unknown method '" + m + "'");
    }
  }
  if (threads == 0) throw InputError("--threads must be >= 1");
  hec.Validate();
  if (!(stacking.learning_rate > 0.0)) throw InputError("--stack-lr must be > 0");
  if (stacking.l2 < 0.0) throw InputError("--stack-l2 must be >= 0");
  if (shapley_samples < 1) throw InputError("--shapley-samples must be >= 1");
  if (!(bayes_alpha > 0.0)) throw InputError("--bayes-alpha must be > 0");
  if (random_trials < 1) throw InputError("--random-trials must be >= 1");
  if (random_p < 0.0 || random_p > 1.0) {
    throw InputError("--random-p must lie in [0,1]");
  }
}

RunConfig MakeRunConfig(const std::map<std::string, std::string>& options) {
  RunConfig c;
  for (const auto& [key, value] : options) {
    if (!KnownOptionKeys().contains(key)) {
      throw InputError("unknown option '" + key + "'");
    }
    if (key == "val") {
      c.validation_path = value;
    } else if (key == "test") {
      c.test_path = value;
    } else if (key == "meta") {
      c.meta_path = value;
    } else if (key == "out") {
      c.output_dir = value;
    } else if (key == "trace") {
      c.trace_path = value;
    } else if (key == "dataset") {
      c.dataset = value;
    } else if (key == "classes") {
      const auto classes = ToUnsigned(key, value);
      if (classes < 2 || classes > 1u << 16) {
        throw InputError(OptionError(key, value, "a class count in [2, 65536]"));
      }
      c.class_count = static_cast<int>(classes);
    } else if (key == "method") {
      c.methods = SplitList(value);
    } else if (key == "pool") {
      if (value == "all") {
        c.pool = {PoolKind::kAll, {}};
      } else if (value == "transformers") {
        c.pool = {PoolKind::kTransformers, {}};
      } else if (value.starts_with("ids:")) {
        c.pool = {PoolKind::kIds, SplitList(value.substr(4))};
        if (c.pool.ids.empty()) {
          throw InputError(OptionError(key, value, "a non-empty id list"));
        }
      } else {
        throw InputError(OptionError(key, value, "all|transformers|ids:..."));
      }
    } else if (key == "seed") {
      c.master_seed = ToUnsigned(key, value);
    } else if (key == "threads") {
      c.threads = static_cast<std::size_t>(ToUnsigned(key, value));
    } else if (key == "greedy") {
      c.hec.greedy = ToBool(key, value);
    } else if (key == "s-max") {
      c.hec.max_seed_size = static_cast<std::size_t>(ToUnsigned(key, value));
    } else if (key == "t-init") {
      c.hec.initial_temperature = ToDouble(key, value);
    } else if (key == "t-min") {
      c.hec.min_temperature = ToDouble(key, value);
    } else if (key == "cooling-rate") {
      c.hec.cooling_rate = ToDouble(key, value);
    } else if (key == "wmv-literal-eq3") {
      c.wmv_normalization = ToBool(key, value) ? WmvNormalization::kPerCategory
                                               : WmvNormalization::kGlobal;
    } else if (key == "search-rule") {
      if (value == "weighted") {
        c.hec.search_rule = SearchRule::kWeighted;
      } else if (value == "majority") {
        c.hec.search_rule = SearchRule::kMajority;
      } else {
        throw InputError(OptionError(key, value, "weighted|majority"));
      }
    } else if (key == "shapley-method") {
      if (value == "exact") {
        c.shapley_method = ShapleyMethod::kExact;
      } else if (value == "mc") {
        c.shapley_method = ShapleyMethod::kMonteCarlo;
      } else if (value == "multilinear") {
        c.shapley_method = ShapleyMethod::kMultilinear;
      } else if (value == "emc") {
        c.shapley_method = ShapleyMethod::kExpectedMarginal;
      } else {
        throw InputError(OptionError(key, value, "exact|mc|multilinear|emc"));
      }
    } else if (key == "shapley-samples") {
      c.shapley_samples = static_cast<std::size_t>(ToUnsigned(key, value));
    } else if (key == "shapley-game") {
      if (value == "majority") {
        c.shapley_game = ShapleyGame::kMajority;
      } else if (value == "weighted") {
        c.shapley_game = ShapleyGame::kWeighted;
      } else {
        throw InputError(OptionError(key, value, "majority|weighted"));
      }
    } else if (key == "stack-lr") {
      c.stacking.learning_rate = ToDouble(key, value);
    } else if (key == "stack-epochs") {
      c.stacking.epochs = static_cast<std::size_t>(ToUnsigned(key, value));
    } else if (key == "stack-l2") {
      c.stacking.l2 = ToDouble(key, value);
    } else if (key == "bayes-alpha") {
      c.bayes_alpha = ToDouble(key, value);
    } else if (key == "random-trials") {
      c.random_trials = static_cast<std::size_t>(ToUnsigned(key, value));
    } else if (key == "random-p") {
      c.random_p = ToDouble(key, value);
    }
  }
  c.hec.normalization = c.wmv_normalization;
  return c;
}

std::map<std::string, std::string> ReadConfigOptions(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config " + path.string());
  std::map<std::string, std::string> options;
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    if (!doc.is_object()) throw InputError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (!KnownOptionKeys().contains(key)) {
        throw InputError(path.string() + ": unknown config key '" + key + "'");
      }
      if (value.is_string()) {
        options[key] = value.get<std::string>();
      } else if (value.is_boolean()) {
        options[key] = value.get<bool>() ? "true" : "false";
      } else if (value.is_number()) {
        options[key] = value.dump();
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
          if (!joined.empty()) joined += ',';
          joined += item.get<std::string>();
        }
        options[key] = joined;
      } else {
        throw InputError(path.string() + ": unsupported value for '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return options;
}

std::vector<std::string> SelectPool(const DatasetBundle& bundle,
                                    const CandidatePool& pool) {
  const auto& all = bundle.validation().learner_ids();
  std::vector<std::string> out;
  switch (pool.kind) {
    case PoolKind::kAll:
      out = all;
      break;
    case PoolKind::kTransformers:
      for (const auto& id : all) {
        if (bundle.MetaFor(id).category == LearnerCategory::kTransformer) {
          out.push_back(id);
        }
      }
      break;
    case PoolKind::kIds: {
      const std::set<std::string> wanted(pool.ids.begin(), pool.ids.end());
      if (wanted.size() != pool.ids.size()) {
        throw InputError("--pool lists a learner twice");
      }
      for (const auto& id : wanted) bundle.validation().IndexOf(id);
      for (const auto& id : all) {
        if (wanted.contains(id)) out.push_back(id);
      }
      break;
    }
  }
  if (out.empty()) throw InputError("candidate pool is empty");
  return out;
}

std::uint64_t MethodSeed(std::uint64_t master_seed, std::string_view method) {
  // FNV-1a of the method name is the tag.
  std::uint64_t tag = 0xcbf29ce484222325ULL;
  for (const char ch : method) {
    tag ^= static_cast<unsigned char>(ch);
    tag *= 0x100000001b3ULL;
  }
  return DeriveStream(master_seed, tag, 0);
}

RunOutcome ExecuteRun(const RunConfig& config) {
  config.Validate();
  const DatasetBundle bundle = LoadBundle(config.validation_path, config.test_path,
                                          config.meta_path, config.class_count);
  return ExecuteRun(config, bundle);
}

RunOutcome ExecuteRun(const RunConfig& config, const DatasetBundle& bundle) {
  const std::vector<std::string> pool = SelectPool(bundle, config.pool);
  const std::string dataset = DatasetLabel(config);
  RunOutcome outcome;
  std::vector<MethodResult> results;
  for (const std::string& method : config.methods) {
    if (method == "hec") {
      HecConfig hec = config.hec;
      hec.master_seed = MethodSeed(config.master_seed, method);
      hec.threads = config.threads;
      hec.normalization = config.wmv_normalization;
      hec.record_trace = config.trace_path.has_value();
      EnsembleSolution solution = HecConstruct(bundle, pool, hec);
      results.push_back(FromSolution(dataset, method, bundle, solution));
      outcome.trace = std::move(solution.trace);
    } else if (method == "wmv") {
      results.push_back(FromSolution(
          dataset, method, bundle,
          WmvConstruct(bundle, pool, config.wmv_normalization)));
    } else if (method == "majority") {
      EnsembleSolution solution;
      solution.members = pool;
      solution.rule = MajorityRule{};
      solution.validation_score =
          EvaluateEnsemble(bundle.validation(), pool, solution.rule);
      results.push_back(FromSolution(dataset, method, bundle, solution));
    } else if (method == "best-single") {
      EnsembleSolution solution;
      solution.members = {RankLearners(bundle, pool).front()};
      solution.rule = MajorityRule{};
      solution.validation_score =
          LearnerAccuracy(bundle.validation(), solution.members.front());
      results.push_back(FromSolution(dataset, method, bundle, solution));
    } else if (method == "random") {
      RandomSelectionParams params;
      params.trials = config.random_trials;
      params.inclusion_probability = config.random_p;
      params.rng_seed = MethodSeed(config.master_seed, method);
      results.push_back(FromSolution(dataset, method, bundle,
                                     RandomConstruct(bundle, pool, params)));
    } else if (method == "shapley") {
      ShapleyParams params;
      params.method = config.shapley_method;
      params.sample_count = config.shapley_samples;
      params.game = config.shapley_game;
      params.rng_seed = MethodSeed(config.master_seed, method);
      params.threads = config.threads;
      const ShapleyResult values = ShapleyValues(bundle, pool, params);
      results.push_back(FromSolution(dataset, method, bundle,
                                     ShapleyConstruct(bundle, values)));
    } else if (method == "stacking") {
      const StackingModel model = StackingFit(bundle, pool, config.stacking);
      MethodResult r;
      r.dataset = dataset;
      r.method = method;
      r.validation_accuracy = Accuracy(
          StackingPredict(model, bundle.validation()), bundle.validation().gold());
      r.test_accuracy =
          Accuracy(StackingPredict(model, bundle.test()), bundle.test().gold());
      r.members = pool;
      r.ensemble_size = pool.size();
      results.push_back(std::move(r));
    } else if (method == "bayes") {
      const BayesCombiner combiner = BayesFit(bundle, pool, config.bayes_alpha);
      MethodResult r;
      r.dataset = dataset;
      r.method = method;
      r.validation_accuracy = Accuracy(BayesPredict(combiner, bundle.validation()),
                                       bundle.validation().gold());
      r.test_accuracy =
          Accuracy(BayesPredict(combiner, bundle.test()), bundle.test().gold());
      r.members = pool;
      r.ensemble_size = pool.size();
      results.push_back(std::move(r));
    } else {
      throw InputError("unknown method '" + method + "'");
    }
  }
  outcome.report = BuildReport(std::move(results));
  return outcome;
}

std::string FormatTraceCsv(const std::vector<TraceRecord>& trace) {
  std::string out = "seed_index,candidate_id,delta_e,temperature,u,accepted\n";
  for (const auto& t : trace) {
    out += std::to_string(t.seed_index) + ',' + t.candidate_id + ',' +
           Exact17(t.delta_e) + ',' + Exact17(t.temperature) + ',' +
           Exact17(t.u) + ',' + (t.accepted ? "1" : "0") + '\n';
  }
  return out;
}

void WriteRunOutputs(const RunConfig& config, const RunOutcome& outcome) {
  if (config.output_dir.empty()) throw InputError("--out is required");
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw InputError("cannot create " + config.output_dir.string() + ": " +
                     ec.message());
  }
  EmitReport(outcome.report, ReportFormat::kCsv, config.output_dir / "report.csv");
  EmitReport(outcome.report, ReportFormat::kJson,
             config.output_dir / "report.json");
  EmitReport(outcome.report, ReportFormat::kMarkdown,
             config.output_dir / "report.md");
  if (config.trace_path) WriteText(*config.trace_path, FormatTraceCsv(outcome.trace));
}

BenchReport ExecuteBench(const RunConfig& config) {
  config.Validate();
  const DatasetBundle bundle = LoadBundle(config.validation_path, config.test_path,
                                          config.meta_path, config.class_count);
  const std::vector<std::string> pool = SelectPool(bundle, config.pool);
  HecConfig hec = config.hec;
  hec.master_seed = MethodSeed(config.master_seed, "hec");
  hec.threads = config.threads;
  hec.normalization = config.wmv_normalization;

  HecStats stats;
  const auto start = std::chrono::steady_clock::now();
  const EnsembleSolution solution = HecConstruct(bundle, pool, hec, &stats);
  const auto stop = std::chrono::steady_clock::now();

  BenchReport report;
  report.wall_seconds = std::chrono::duration<double>(stop - start).count();
  report.seeds = stats.seeds;
  report.evaluations = stats.evaluations;
  report.evaluations_per_second =
      report.wall_seconds > 0.0
          ? static_cast<double>(stats.evaluations) / report.wall_seconds
          : 0.0;
  report.threads = config.threads;
  report.validation_score = solution.validation_score;
  report.members = solution.members;
  return report;
}

std::string FormatBenchReport(const BenchReport& report) {
  std::ostringstream out;
  std::string members;
  for (const auto& m : report.members) {
    if (!members.empty()) members += '|';
    members += m;
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", report.wall_seconds);
  out << "wall_seconds: " << buffer << "\n";
  out << "seeds_processed: " << report.seeds << "\n";
  out << "ensemble_evaluations: " << report.evaluations << "\n";
  std::snprintf(buffer, sizeof(buffer), "%.1f", report.evaluations_per_second);
  out << "evaluations_per_second: " << buffer << "\n";
  out << "threads: " << report.threads << "\n";
  out << "validation_score: " << Exact17(report.validation_score) << "\n";
  out << "members: " << members << "\n";
  return out.str();
}

}  // namespace hec
