/*
 * Copyright 2026 The FedMF Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FEDMF_RNG_HPP_
#define FEDMF_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fedmf {

using Rng = std::mt19937_64;

// Named sub-streams so that independent consumers of one run seed never
// share random draws.
enum class Stream : std::uint32_t {
  kInit = 1,
  kSynthetic = 2,
  kSplit = 3,
  kPartition = 4,
  kMinibatch = 5,
  kMask = 6,
  kDpNoise = 7,
  kSideData = 8,
};

/// Deterministic generator for (seed, stream, coordinates...).
inline Rng make_rng(std::uint64_t seed, Stream stream,
                    std::initializer_list<std::uint64_t> coords = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(4 + 2 * coords.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  words.push_back(static_cast<std::uint32_t>(stream));
  for (std::uint64_t c : coords) {
    words.push_back(static_cast<std::uint32_t>(c));
    words.push_back(static_cast<std::uint32_t>(c >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace fedmf

#endif  // FEDMF_RNG_HPP_
