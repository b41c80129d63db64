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

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hec/errors.hpp"
#include "hec/run.hpp"

namespace hec {

namespace {

struct ValueFlag {
  const char* name;
  const char* help;
};

constexpr ValueFlag kValueFlags[] = {
    {"val", "validation predictions CSV"},
    {"test", "test predictions CSV"},
    {"meta", "learner metadata CSV"},
    {"classes", "number of classes"},
    {"method", "comma-separated methods"},
    {"pool", "all|transformers|ids:a,b,..."},
    {"seed", "master seed"},
    {"threads", "worker threads"},
    {"s-max", "largest seed size"},
    {"t-init", "initial temperature"},
    {"t-min", "final temperature"},
    {"cooling-rate", "temperature multiplier per candidate"},
    {"search-rule", "weighted|majority"},
    {"shapley-method", "exact|mc|multilinear|emc"},
    {"shapley-samples", "Shapley samples"},
    {"shapley-game", "majority|weighted"},
    {"stack-lr", "stacking learning rate"},
    {"stack-epochs", "stacking epochs"},
    {"stack-l2", "stacking L2 strength"},
    {"bayes-alpha", "Bayes smoothing"},
    {"random-trials", "random selection trials"},
    {"random-p", "random inclusion probability"},
    {"trace", "annealing trace CSV"},
    {"dataset", "dataset label in the report"},
};

constexpr const char* kBoolFlags[] = {"greedy", "wmv-literal-eq3"};

// Registers the shared run/bench flags. Values land in `values`; flags the
// user did not give stay out of the final option map.
struct RunFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::Option*> options;
  std::string config;
  CLI::Option* config_option = nullptr;

  void Register(CLI::App* app) {
    for (const auto& f : kValueFlags) {
      options[f.name] = app->add_option(std::string("--") + f.name,
                                        values[f.name], f.help);
    }
    for (const char* name : kBoolFlags) {
      options[name] = app->add_flag(std::string("--") + name, switches[name]);
    }
    config_option = app->add_option("--config", config, "JSON config file");
  }

  std::map<std::string, std::string> Collect() const {
    std::map<std::string, std::string> merged;
    if (config_option->count() > 0) merged = ReadConfigOptions(config);
    for (const auto& [name, option] : options) {
      if (option->count() == 0) continue;
      const auto sw = switches.find(name);
      merged[name] = sw != switches.end() ? (sw->second ? "true" : "false")
                                          : values.at(name);
    }
    return merged;
  }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

int RunCli(int argc, const char* const* argv) {
  CLI::App app("Hierarchical ensemble construction over frozen learner predictions");
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "build ensembles and write a report");
  RunFlags run_flags;
  run_flags.Register(run);
  std::string out_dir;
  run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* bench = app.add_subcommand("bench", "time the annealing search");
  RunFlags bench_flags;
  bench_flags.Register(bench);

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic bundle");
  std::string spec_path;
  std::string synth_out;
  synth->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  synth->add_option("--out", synth_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) {
      auto options = run_flags.Collect();
      options["out"] = out_dir;
      const RunConfig config = MakeRunConfig(options);
      const RunOutcome outcome = ExecuteRun(config);
      WriteRunOutputs(config, outcome);
      std::cout << FormatReport(outcome.report, ReportFormat::kMarkdown);
    } else if (bench->parsed()) {
      const RunConfig config = MakeRunConfig(bench_flags.Collect());
      std::cout << FormatBenchReport(ExecuteBench(config));
    } else if (synth->parsed()) {
      const SyntheticSpec spec = ParseSyntheticSpec(ReadFile(spec_path));
      const DatasetBundle bundle = GenerateSynthetic(spec);
      const std::filesystem::path dir(synth_out);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
      EmitBundle(bundle, dir / "validation.csv", dir / "test.csv", dir / "meta.csv");
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ComputationError& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace hec
