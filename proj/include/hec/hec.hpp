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

// Hierarchical Ensemble Construction.
//
// Learners are ranked by validation accuracy into a list L. Every subset of
// L with at most S members (the empty set included) seeds one trajectory:
//
//   T <- T_init; previous <- score(M); L' <- L - M in L order
//   for each X in L':
//     dE <- score(M + X) - previous
//     if dE >= 0 or exp(dE / T) > U[0,1): M <- M + X; previous <- score(M + X)
//     T <- T * coolingRate
//     if T <= T_min: stop
//
// The trajectory whose final score is strictly highest wins; ties keep the
// earliest seed in enumeration order (size ascending, then lexicographic over
// L positions). The winner is returned with the search rule over its members.
//
// Scores are accuracies in [0,1], so dE is a fraction, not percentage points.
// Cooling is applied after every candidate whether or not it was accepted,
// and at most 1 + floor(log(T_min / T_init) / log(coolingRate)) candidates are
// examined per seed.
//
// Seeds are independent. Each one draws from its own stream derived from the
// master seed and its enumeration index, so any number of worker threads
// produces the same result as a sequential run.

#ifndef HEC_HEC_HPP_
#define HEC_HEC_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hec/aggregation.hpp"
#include "hec/prediction_data.hpp"
#include "hec/rng.hpp"

namespace hec {

enum class SearchRule : std::uint8_t { kWeighted, kMajority };

struct HecConfig {
  std::size_t max_seed_size = 3;  // S
  double initial_temperature = 0.8;
  double min_temperature = 0.1;
  double cooling_rate = 0.8;
  std::uint64_t master_seed = 0;
  // Reject every worsening move.
  bool greedy = false;
  SearchRule search_rule = SearchRule::kWeighted;
  WmvNormalization normalization = WmvNormalization::kGlobal;
  std::size_t threads = 1;
  bool record_trace = false;

  // Throws InputError on out-of-range fields.
  void Validate() const;
};

// Sum_{i=0..S} C(n, i). Throws InputError if S > n or on overflow.
std::uint64_t SeedCount(std::size_t n, std::size_t max_size);

struct SeedSubset {
  std::vector<std::size_t> members;  // ascending positions in L
  std::uint64_t seed_index = 0;
};

// Streams every subset of {0..n-1} with at most `max_size` elements: by size
// ascending, then lexicographically.
class SeedEnumerator {
 public:
  SeedEnumerator(std::size_t n, std::size_t max_size);

  // Writes the next seed into `out`; false once exhausted.
  bool Next(SeedSubset& out);

 private:
  std::size_t n_;
  std::size_t max_size_;
  std::size_t size_ = 0;
  std::vector<std::size_t> current_;
  std::uint64_t index_ = 0;
  bool started_ = false;
  bool done_ = false;
};

std::vector<SeedSubset> EnumerateSeeds(std::size_t n, std::size_t max_size);

// True iff the move is taken: dE >= 0, or (outside greedy mode)
// exp(dE / T) > u.
bool AcceptanceDecision(double delta_e, double temperature, double u,
                        bool greedy = false);

// Upper bound on the candidates one trajectory examines before cooling stops
// it, ignoring the length of L'.
std::size_t CoolingStepLimit(const HecConfig& config);

struct Trajectory {
  std::vector<std::size_t> members;  // positions in L, ascending
  double final_score = 0.0;
  double max_score = 0.0;  // best score seen along the way
  std::size_t examined = 0;
  std::size_t evaluations = 0;
  std::vector<TraceRecord> trace;
};

// Runs one annealed extension. `ranked` holds column indices of `evaluator`'s
// matrix in L order, and `ids` the matching learner ids (for the trace). The
// evaluator must be empty on entry and is left empty on return.
Trajectory AnnealExtend(const SeedSubset& seed,
                        std::span<const std::size_t> ranked,
                        std::span<const std::string> ids,
                        SubsetEvaluator& evaluator, const HecConfig& config,
                        Rng& rng);

// Convenience overload over a bundle: L is `ranked_ids` and the search rule
// comes from `config`.
Trajectory AnnealExtend(const SeedSubset& seed,
                        std::span<const std::string> ranked_ids,
                        const DatasetBundle& bundle, const HecConfig& config,
                        Rng& rng);

struct HecStats {
  std::uint64_t seeds = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t candidates_examined = 0;
  std::optional<std::uint64_t> best_seed_index;
  // Largest score any trajectory reached at any step.
  double best_trajectory_max = 0.0;
};

// Runs HEC over `pool` (all validation learners when empty).
EnsembleSolution HecConstruct(const DatasetBundle& bundle,
                              std::span<const std::string> pool,
                              const HecConfig& config,
                              HecStats* stats = nullptr);

}  // namespace hec

#endif  // HEC_HEC_HPP_
