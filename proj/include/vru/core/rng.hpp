// Copyright 2026 The vrudetect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VRU_CORE_RNG_HPP_
#define VRU_CORE_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace vru
{

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds from (seed, tag...) tuples.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
{
  std::uint64_t s = mix_seed(seed);
  for (auto t : tags) {
    s = mix_seed(s ^ mix_seed(t + 0x51ed270b27c3f8d1ULL));
  }
  return s;
}

inline double uniform(Rng & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng & rng, int lo, int hi)
{
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool bernoulli(Rng & rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace vru

#endif  // VRU_CORE_RNG_HPP_
