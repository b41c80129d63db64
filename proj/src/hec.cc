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

#include "hec/hec.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

#include "hec/errors.hpp"

namespace hec {

void HecConfig::Validate() const {
  if (!(initial_temperature > 0.0) || !std::isfinite(initial_temperature)) {
    throw InputError("initial temperature must be > 0");
  }
  if (!(min_temperature > 0.0) || !std::isfinite(min_temperature)) {
    throw InputError("minimum temperature must be > 0");
  }
  if (min_temperature > initial_temperature) {
    throw InputError("minimum temperature must not exceed the initial one");
  }
  if (!(cooling_rate > 0.0 && cooling_rate < 1.0)) {
    throw InputError("cooling rate must lie in (0,1)");
  }
  if (threads == 0) throw InputError("thread count must be >= 1");
}

std::uint64_t SeedCount(std::size_t n, std::size_t max_size) {
  if (max_size > n) {
    throw InputError("seed size " + std::to_string(max_size) +
                     " exceeds learner count " + std::to_string(n));
  }
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 binom = 1;  // C(n, 0)
  unsigned __int128 total = 1;
  for (std::size_t i = 1; i <= max_size; ++i) {
    binom = binom * (n - i + 1) / i;
    total += binom;
    if (binom > kMax || total > kMax) throw InputError("seed count overflows");
  }
  return static_cast<std::uint64_t>(total);
}

SeedEnumerator::SeedEnumerator(std::size_t n, std::size_t max_size)
    : n_(n), max_size_(max_size) {
  if (max_size > n) {
    throw InputError("seed size " + std::to_string(max_size) +
                     " exceeds learner count " + std::to_string(n));
  }
}

bool SeedEnumerator::Next(SeedSubset& out) {
  if (done_) return false;
  if (!started_) {
    started_ = true;
  } else {
    // Advance to the next combination of the current size.
    std::size_t k = current_.size();
    std::size_t i = k;
    while (i > 0 && current_[i - 1] == n_ - k + i - 1) --i;
    if (i > 0) {
      ++current_[i - 1];
      for (std::size_t j = i; j < k; ++j) current_[j] = current_[j - 1] + 1;
    } else {
      ++size_;
      if (size_ > max_size_) {
        done_ = true;
        return false;
      }
      current_.resize(size_);
      for (std::size_t j = 0; j < size_; ++j) current_[j] = j;
    }
  }
  out.members = current_;
  out.seed_index = index_++;
  return true;
}

std::vector<SeedSubset> EnumerateSeeds(std::size_t n, std::size_t max_size) {
  SeedEnumerator it(n, max_size);
  std::vector<SeedSubset> seeds;
  seeds.reserve(SeedCount(n, max_size));
  SeedSubset seed;
  while (it.Next(seed)) seeds.push_back(seed);
  return seeds;
}

bool AcceptanceDecision(double delta_e, double temperature, double u,
                        bool greedy) {
  if (delta_e >= 0.0) return true;
  if (greedy) return false;
  return std::exp(delta_e / temperature) > u;
}

std::size_t CoolingStepLimit(const HecConfig& config) {
  config.Validate();
  // Mirrors the loop exactly rather than the closed form, so rounding in the
  // repeated multiplication is accounted for.
  double t = config.initial_temperature;
  std::size_t steps = 0;
  do {
    ++steps;
    t *= config.cooling_rate;
  } while (t > config.min_temperature);
  return steps;
}

Trajectory AnnealExtend(const SeedSubset& seed,
                        std::span<const std::size_t> ranked,
                        std::span<const std::string> ids,
                        SubsetEvaluator& evaluator, const HecConfig& config,
                        Rng& rng) {
  Trajectory out;
  std::vector<std::uint8_t> in_seed(ranked.size(), 0);
  for (const std::size_t pos : seed.members) {
    if (pos >= ranked.size() || in_seed[pos]) {
      throw InputError("seed is not a subset of the learner list");
    }
    in_seed[pos] = 1;
    evaluator.Add(ranked[pos]);
    out.members.push_back(pos);
  }
  double previous = evaluator.Accuracy();
  out.evaluations = 1;
  out.max_score = previous;

  double temperature = config.initial_temperature;
  for (std::size_t pos = 0; pos < ranked.size(); ++pos) {
    if (in_seed[pos]) continue;
    const std::size_t column = ranked[pos];
    evaluator.Add(column);
    const double score = evaluator.Accuracy();
    ++out.evaluations;
    ++out.examined;
    const double delta_e = score - previous;
    const double u = rng.Uniform();
    const bool accepted =
        AcceptanceDecision(delta_e, temperature, u, config.greedy);
    if (config.record_trace) {
      out.trace.push_back(
          {seed.seed_index, ids[pos], delta_e, temperature, u, accepted});
    }
    if (accepted) {
      out.members.push_back(pos);
      previous = score;
      out.max_score = std::max(out.max_score, score);
    } else {
      evaluator.Remove(column);
    }
    temperature *= config.cooling_rate;
    if (temperature <= config.min_temperature) break;
  }
  out.final_score = previous;
  for (const std::size_t pos : out.members) evaluator.Remove(ranked[pos]);
  std::sort(out.members.begin(), out.members.end());
  return out;
}

namespace {

SubsetScoring ScoringFor(const HecConfig& config) {
  if (config.search_rule == SearchRule::kMajority) {
    return SubsetScoring::kMajority;
  }
  return config.normalization == WmvNormalization::kGlobal
             ? SubsetScoring::kWmv
             : SubsetScoring::kWmvPerCategory;
}

struct Candidate {
  double score = 0.0;
  std::uint64_t seed_index = 0;
  std::vector<std::size_t> members;
  bool valid = false;

  // Strictly higher score wins; equal scores keep the earlier seed, which is
  // what a sequential pass with a strict comparison produces.
  void Offer(double s, std::uint64_t index,
             const std::vector<std::size_t>& m) {
    if (!(s > 0.0)) return;
    if (!valid || s > score || (s == score && index < seed_index)) {
      score = s;
      seed_index = index;
      members = m;
      valid = true;
    }
  }
};

}  // namespace

Trajectory AnnealExtend(const SeedSubset& seed,
                        std::span<const std::string> ranked_ids,
                        const DatasetBundle& bundle, const HecConfig& config,
                        Rng& rng) {
  const PredictionMatrix& validation = bundle.validation();
  std::vector<std::size_t> ranked;
  for (const auto& id : ranked_ids) ranked.push_back(validation.IndexOf(id));
  const auto categories = ColumnCategories(bundle, validation);
  SubsetEvaluator evaluator(validation, categories, ScoringFor(config));
  return AnnealExtend(seed, ranked, ranked_ids, evaluator, config, rng);
}

EnsembleSolution HecConstruct(const DatasetBundle& bundle,
                              std::span<const std::string> pool,
                              const HecConfig& config, HecStats* stats) {
  config.Validate();
  const PredictionMatrix& validation = bundle.validation();
  const std::vector<std::string> ranked_ids =
      pool.empty() ? RankLearners(bundle) : RankLearners(bundle, pool);
  if (ranked_ids.empty()) throw InputError("empty learner set");
  if (std::set<std::string>(ranked_ids.begin(), ranked_ids.end()).size() !=
      ranked_ids.size()) {
    throw InputError("duplicate learner id in candidate pool");
  }
  const std::size_t n = ranked_ids.size();
  const std::size_t max_seed = std::min(config.max_seed_size, n);
  const std::uint64_t total_seeds = SeedCount(n, max_seed);

  std::vector<std::size_t> ranked;
  ranked.reserve(n);
  for (const auto& id : ranked_ids) ranked.push_back(validation.IndexOf(id));
  const std::vector<LearnerCategory> categories =
      ColumnCategories(bundle, validation);
  const SubsetScoring scoring = ScoringFor(config);

  SeedEnumerator enumerator(n, max_seed);
  std::mutex enumerator_mutex;
  constexpr std::size_t kBatch = 128;

  const std::size_t workers = static_cast<std::size_t>(std::max<std::uint64_t>(
      1, std::min<std::uint64_t>(config.threads, total_seeds)));
  struct WorkerState {
    Candidate best;
    HecStats stats;
    std::vector<std::vector<TraceRecord>> traces;
    std::exception_ptr error;
  };
  std::vector<WorkerState> states(workers);

  auto work = [&](WorkerState& state) {
    try {
      SubsetEvaluator evaluator(validation, categories, scoring);
      std::vector<SeedSubset> batch(kBatch);
      while (true) {
        std::size_t filled = 0;
        {
          std::lock_guard<std::mutex> lock(enumerator_mutex);
          while (filled < kBatch && enumerator.Next(batch[filled])) ++filled;
        }
        if (filled == 0) break;
        for (std::size_t b = 0; b < filled; ++b) {
          const SeedSubset& seed = batch[b];
          Rng rng(DeriveStream(config.master_seed, stream_tag::kHec,
                               seed.seed_index));
          Trajectory t =
              AnnealExtend(seed, ranked, ranked_ids, evaluator, config, rng);
          state.best.Offer(t.final_score, seed.seed_index, t.members);
          state.stats.seeds += 1;
          state.stats.evaluations += t.evaluations;
          state.stats.candidates_examined += t.examined;
          state.stats.best_trajectory_max =
              std::max(state.stats.best_trajectory_max, t.max_score);
          if (config.record_trace && !t.trace.empty()) {
            state.traces.push_back(std::move(t.trace));
          }
        }
      }
    } catch (...) {
      state.error = std::current_exception();
    }
  };

  if (workers == 1) {
    work(states[0]);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (auto& state : states) threads.emplace_back(work, std::ref(state));
    for (auto& t : threads) t.join();
  }

  Candidate best;
  HecStats total;
  std::vector<std::vector<TraceRecord>> traces;
  for (auto& state : states) {
    if (state.error) std::rethrow_exception(state.error);
    if (state.best.valid) {
      best.Offer(state.best.score, state.best.seed_index, state.best.members);
    }
    total.seeds += state.stats.seeds;
    total.evaluations += state.stats.evaluations;
    total.candidates_examined += state.stats.candidates_examined;
    total.best_trajectory_max =
        std::max(total.best_trajectory_max, state.stats.best_trajectory_max);
    for (auto& t : state.traces) traces.push_back(std::move(t));
  }

  EnsembleSolution solution;
  if (config.record_trace) {
    std::sort(traces.begin(), traces.end(), [](const auto& a, const auto& b) {
      return a.front().seed_index < b.front().seed_index;
    });
    for (auto& t : traces) {
      solution.trace.insert(solution.trace.end(), t.begin(), t.end());
    }
  }
  if (!best.valid) {
    // No trajectory scored above zero.
    solution.rule = MajorityRule{};
    solution.validation_score = 0.0;
  } else {
    total.best_seed_index = best.seed_index;
    for (const std::size_t pos : best.members) {
      solution.members.push_back(ranked_ids[pos]);
    }
    if (config.search_rule == SearchRule::kMajority) {
      solution.rule = MajorityRule{};
    } else {
      solution.rule = WeightedRule{LearnerWeights(
          MemberAccuracies(bundle, solution.members), config.normalization)};
    }
    solution.validation_score =
        EvaluateEnsemble(validation, solution.members, solution.rule);
  }
  if (stats != nullptr) *stats = total;
  return solution;
}

}  // namespace hec
