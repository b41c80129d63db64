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

// Shapley values of the validation-accuracy game.
//
//   exact              all 2^n coalitions, visited in Gray-code order so each
//                      step adds or removes one learner from the tally
//   monte_carlo        average marginal contribution along sampled
//                      permutations
//   multilinear        coalitions drawn with inclusion probability
//                      q in {0.05, 0.10, ..., 0.95}; the marginal of every
//                      learner is averaged per q, then across q
//   expected_marginal  coalitions of a fixed size k drawn uniformly, k cycling
//                      through 0..n; the marginal of every learner is
//                      averaged per size stratum, then across strata
//
// Samples are processed in fixed-size chunks, each with its own derived
// stream; chunk partial sums are reduced in chunk order so the result does
// not depend on the thread count.

#include <bit>
#include <cmath>
#include <numeric>

#include "hec/baselines.hpp"
#include "hec/errors.hpp"
#include "hec/rng.hpp"
#include "parallel.hpp"

namespace hec {

namespace {

constexpr std::size_t kChunk = 64;
constexpr std::size_t kQuantiles = 19;

double Quantile(std::size_t j) { return 0.05 * static_cast<double>(j + 1); }

// Evaluator over the selected learners, addressed by position 0..n-1.
class Game {
 public:
  Game(const DatasetBundle& bundle, std::span<const std::string> ids,
       ShapleyGame game)
      : evaluator_(bundle.validation(),
                   ColumnCategories(bundle, bundle.validation()),
                   game == ShapleyGame::kMajority ? SubsetScoring::kMajority
                                                  : SubsetScoring::kWmv) {
    for (const auto& id : ids) columns_.push_back(bundle.validation().IndexOf(id));
  }

  void Add(std::size_t pos) { evaluator_.Add(columns_[pos]); }
  void Remove(std::size_t pos) { evaluator_.Remove(columns_[pos]); }
  bool Contains(std::size_t pos) const {
    return evaluator_.Contains(columns_[pos]);
  }
  void Clear() { evaluator_.Clear(); }
  double Value() const { return evaluator_.Accuracy(); }
  std::size_t size() const { return columns_.size(); }

 private:
  SubsetEvaluator evaluator_;
  std::vector<std::size_t> columns_;
};

std::uint64_t MethodTag(ShapleyMethod method) {
  return stream_tag::kShapley + static_cast<std::uint64_t>(method);
}

std::vector<double> Exact(const DatasetBundle& bundle,
                          std::span<const std::string> ids, ShapleyGame kind) {
  const std::size_t n = ids.size();
  Game game(bundle, ids, kind);
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> value(subsets, 0.0);
  std::size_t mask = 0;
  for (std::size_t i = 1; i < subsets; ++i) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(i));
    mask ^= std::size_t{1} << bit;
    if (mask & (std::size_t{1} << bit)) {
      game.Add(bit);
    } else {
      game.Remove(bit);
    }
    value[mask] = game.Value();
  }

  // weight(s) = s! (n - s - 1)! / n! = 1 / (n * C(n-1, s))
  std::vector<double> weight(n, 0.0);
  double binom = 1.0;
  for (std::size_t s = 0; s < n; ++s) {
    weight[s] = 1.0 / (static_cast<double>(n) * binom);
    binom = binom * static_cast<double>(n - 1 - s) / static_cast<double>(s + 1);
  }
  std::vector<double> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double sum = 0.0;
    for (std::size_t s = 0; s < subsets; ++s) {
      if (s & bit) continue;
      sum += weight[static_cast<std::size_t>(std::popcount(s))] *
             (value[s | bit] - value[s]);
    }
    phi[i] = sum;
  }
  return phi;
}

// Stratified accumulator: strata x learners sums plus per-stratum counts.
struct Strata {
  Strata(std::size_t strata, std::size_t n)
      : learners(n), sum(strata * n, 0.0), count(strata * n, 0) {}

  void Add(std::size_t stratum, std::size_t learner, double v) {
    sum[stratum * learners + learner] += v;
    count[stratum * learners + learner] += 1;
  }
  void Merge(const Strata& other) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += other.sum[i];
      count[i] += other.count[i];
    }
  }
  // Mean over strata of the per-stratum mean, skipping empty strata.
  std::vector<double> Estimate() const {
    const std::size_t strata = sum.size() / learners;
    std::vector<double> out(learners, 0.0);
    for (std::size_t i = 0; i < learners; ++i) {
      double total = 0.0;
      std::size_t used = 0;
      for (std::size_t k = 0; k < strata; ++k) {
        const std::size_t cell = k * learners + i;
        if (count[cell] == 0) continue;
        total += sum[cell] / static_cast<double>(count[cell]);
        ++used;
      }
      out[i] = used == 0 ? 0.0 : total / static_cast<double>(used);
    }
    return out;
  }

  std::size_t learners;
  std::vector<double> sum;
  std::vector<std::size_t> count;
};

template <typename SampleFn, typename Acc>
Acc SampleInChunks(const DatasetBundle& bundle,
                   std::span<const std::string> ids,
                   const ShapleyParams& params, const Acc& zero,
                   SampleFn&& sample) {
  const std::size_t chunks = (params.sample_count + kChunk - 1) / kChunk;
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(params.threads, chunks));
  std::vector<Game> games;
  games.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) games.emplace_back(bundle, ids, params.game);
  std::vector<Acc> partial(chunks, zero);
  internal::RunChunks(chunks, workers, [&](std::size_t chunk, std::size_t w) {
    const std::size_t begin = chunk * kChunk;
    const std::size_t end = std::min(params.sample_count, begin + kChunk);
    for (std::size_t s = begin; s < end; ++s) {
      Rng rng(DeriveStream(params.rng_seed, MethodTag(params.method), s));
      sample(s, rng, games[w], partial[chunk]);
    }
  });
  Acc total = zero;
  for (const Acc& p : partial) total.Merge(p);
  return total;
}

struct Sums {
  explicit Sums(std::size_t n) : sum(n, 0.0) {}
  void Merge(const Sums& other) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other.sum[i];
  }
  std::vector<double> sum;
};

std::vector<double> MonteCarlo(const DatasetBundle& bundle,
                               std::span<const std::string> ids,
                               const ShapleyParams& params) {
  const std::size_t n = ids.size();
  const Sums total = SampleInChunks(
      bundle, ids, params, Sums(n),
      [&](std::size_t, Rng& rng, Game& game, Sums& acc) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.Shuffle(std::span<std::size_t>(perm));
        double previous = 0.0;
        for (const std::size_t pos : perm) {
          game.Add(pos);
          const double current = game.Value();
          acc.sum[pos] += current - previous;
          previous = current;
        }
        game.Clear();
      });
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = total.sum[i] / static_cast<double>(params.sample_count);
  }
  return phi;
}

// Adds the marginal of every learner with respect to the game's current
// coalition to `stratum_of(in_coalition)`.
template <typename StratumFn>
void AccumulateMarginals(Game& game, Strata& acc, StratumFn&& stratum_of) {
  const double base = game.Value();
  for (std::size_t i = 0; i < game.size(); ++i) {
    if (game.Contains(i)) {
      game.Remove(i);
      acc.Add(stratum_of(true), i, base - game.Value());
      game.Add(i);
    } else {
      game.Add(i);
      acc.Add(stratum_of(false), i, game.Value() - base);
      game.Remove(i);
    }
  }
}

std::vector<double> Multilinear(const DatasetBundle& bundle,
                                std::span<const std::string> ids,
                                const ShapleyParams& params) {
  const std::size_t n = ids.size();
  const Strata total = SampleInChunks(
      bundle, ids, params, Strata(kQuantiles, n),
      [&](std::size_t s, Rng& rng, Game& game, Strata& acc) {
        const std::size_t j = s % kQuantiles;
        const double q = Quantile(j);
        for (std::size_t i = 0; i < n; ++i) {
          if (rng.Uniform() < q) game.Add(i);
        }
        AccumulateMarginals(game, acc, [j](bool) { return j; });
        game.Clear();
      });
  return total.Estimate();
}

std::vector<double> ExpectedMarginal(const DatasetBundle& bundle,
                                     std::span<const std::string> ids,
                                     const ShapleyParams& params) {
  const std::size_t n = ids.size();
  // Stratum k holds marginals with respect to coalitions of k other learners.
  const Strata total = SampleInChunks(
      bundle, ids, params, Strata(n, n),
      [&](std::size_t s, Rng& rng, Game& game, Strata& acc) {
        const std::size_t k = s % (n + 1);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.Shuffle(std::span<std::size_t>(perm));
        for (std::size_t i = 0; i < k; ++i) game.Add(perm[i]);
        // A member's marginal is taken against the other k - 1 members.
        AccumulateMarginals(game, acc,
                            [k](bool member) { return member ? k - 1 : k; });
        game.Clear();
      });
  return total.Estimate();
}

}  // namespace

std::string_view ShapleyMethodName(ShapleyMethod method) {
  switch (method) {
    case ShapleyMethod::kExact:
      return "exact";
    case ShapleyMethod::kMonteCarlo:
      return "monte_carlo";
    case ShapleyMethod::kMultilinear:
      return "multilinear";
    case ShapleyMethod::kExpectedMarginal:
      return "expected_marginal";
  }
  return "unknown";
}

ShapleyResult ShapleyValues(const DatasetBundle& bundle,
                            std::span<const std::string> learner_ids,
                            const ShapleyParams& params) {
  const std::size_t n = learner_ids.size();
  if (n == 0) throw InputError("Shapley values need at least one learner");
  if (params.threads == 0) throw InputError("thread count must be >= 1");
  ShapleyResult result;
  result.method = params.method;
  std::vector<double> phi;
  if (params.method == ShapleyMethod::kExact) {
    if (n > kMaxExactShapleyLearners) {
      throw InputError("exact Shapley values are limited to " +
                       std::to_string(kMaxExactShapleyLearners) +
                       " learners, got " + std::to_string(n));
    }
    phi = Exact(bundle, learner_ids, params.game);
    result.samples_used = std::size_t{1} << n;
  } else {
    if (params.sample_count < 1) throw InputError("sample count must be >= 1");
    switch (params.method) {
      case ShapleyMethod::kMonteCarlo:
        phi = MonteCarlo(bundle, learner_ids, params);
        break;
      case ShapleyMethod::kMultilinear:
        phi = Multilinear(bundle, learner_ids, params);
        break;
      default:
        phi = ExpectedMarginal(bundle, learner_ids, params);
        break;
    }
    result.samples_used = params.sample_count;
  }
  for (std::size_t i = 0; i < n; ++i) result.values[learner_ids[i]] = phi[i];
  return result;
}

EnsembleSolution ShapleyConstruct(const DatasetBundle& bundle,
                                  const ShapleyResult& values) {
  double total = 0.0;
  for (const auto& [id, v] : values.values) total += std::max(v, 0.0);
  if (!(total > 0.0)) {
    throw ComputationError("no learner has a positive Shapley value");
  }
  EnsembleSolution solution;
  WeightVector weights;
  for (const auto& [id, v] : values.values) {
    if (v <= 0.0) continue;
    solution.members.push_back(id);
    weights.entries[id] = v / total;
  }
  solution.rule = WeightedRule{std::move(weights)};
  solution.validation_score =
      EvaluateEnsemble(bundle.validation(), solution.members, solution.rule);
  return solution;
}

}  // namespace hec
