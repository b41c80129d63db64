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

#include "hec/baselines.hpp"
#include "hec/errors.hpp"
#include "hec/rng.hpp"

namespace hec {

EnsembleSolution RandomConstruct(const DatasetBundle& bundle,
                                 std::span<const std::string> learner_ids,
                                 const RandomSelectionParams& params) {
  if (params.trials < 1) throw InputError("random selection needs >= 1 trial");
  const double p = params.inclusion_probability;
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw InputError("inclusion probability must lie in [0,1]");
  }
  if (learner_ids.empty()) throw InputError("empty learner set");

  EnsembleSolution best;
  best.rule = MajorityRule{};
  bool have_best = false;
  for (std::size_t t = 0; t < params.trials; ++t) {
    Rng rng(DeriveStream(params.rng_seed, stream_tag::kRandomSelection, t));
    std::vector<std::string> members;
    for (const auto& id : learner_ids) {
      if (rng.Bernoulli(p)) members.push_back(id);
    }
    const double score =
        EvaluateEnsemble(bundle.validation(), members, MajorityRule{});
    if (!have_best || score > best.validation_score) {
      best.members = std::move(members);
      best.validation_score = score;
      have_best = true;
    }
  }
  return best;
}

}  // namespace hec
