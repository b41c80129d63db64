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

// Portable random streams.
//
// Every random decision in the toolkit goes through `Rng`, a xoshiro256**
// generator whose state is expanded from a 64-bit seed with SplitMix64. The
// standard library distributions are implementation-defined, so uniform
// doubles, bounded integers and shuffles are implemented here to keep results
// identical across compilers and platforms.
//
// Independent streams (one per HEC seed, per Shapley sample, per method) are
// obtained with `DeriveStream(master, tag, index)`, which pushes the three
// values through the SplitMix64 finalizer. Streams never share state, so
// results do not depend on thread scheduling.

#ifndef HEC_RNG_HPP_
#define HEC_RNG_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace hec {

// SplitMix64 finalizer (Stafford variant 13). Bijective on 64-bit values.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t DeriveStream(std::uint64_t master, std::uint64_t tag,
                                     std::uint64_t index) {
  return Mix64(Mix64(Mix64(master) ^ tag) + index);
}

// Fixed tags separating the streams of different consumers of one master seed.
namespace stream_tag {
inline constexpr std::uint64_t kHec = 0x4845432d7365656bULL;
inline constexpr std::uint64_t kShapley = 0x5348415045594c59ULL;
inline constexpr std::uint64_t kRandomSelection = 0x52414e444f4d5345ULL;
inline constexpr std::uint64_t kSyntheticValidation = 0x53594e5456414c49ULL;
inline constexpr std::uint64_t kSyntheticTest = 0x53594e5454455354ULL;
inline constexpr std::uint64_t kStackingProbe = 0x535441434b505242ULL;
}  // namespace stream_tag

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      word = Mix64(x);
      x += 0x9e3779b97f4a7c15ULL;
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return Next(); }

  std::uint64_t Next() {
    const std::uint64_t result = Rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = Rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound). Rejection sampling keeps it exactly unbiased.
  std::uint64_t Below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return x % bound;
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Fisher-Yates.
  template <typename T>
  void Shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  static constexpr std::uint64_t Rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace hec

#endif  // HEC_RNG_HPP_
