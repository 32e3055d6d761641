// Copyright 2026 The FedSel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDSEL_RNG_H_
#define FEDSEL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedsel {

// Every random draw in the library comes from an Rng whose seed was derived
// from one root seed. Streams are keyed by a purpose tag plus up to a few
// integer coordinates (epoch, client id, trial, ...), so a client's draws do
// not depend on which thread runs it or in what order.
using Rng = std::mt19937_64;

// Purpose tags for stream derivation. Values are part of the reproducibility
// contract: changing one changes every seeded result that uses it.
enum class Stream : std::uint64_t {
  kBatchPermutation = 1,
  kClientUpdate = 2,
  kProjection = 3,
  kSynthetic = 4,
  kFolds = 5,
  kMonteCarlo = 6,
  kInit = 7,
};

// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Derives a 64-bit seed from (root, stream, coords...) by folding each value
// through Mix64.
std::uint64_t DeriveSeed(std::uint64_t root, Stream stream,
                         std::initializer_list<std::uint64_t> coords = {});

inline Rng MakeRng(std::uint64_t root, Stream stream,
                   std::initializer_list<std::uint64_t> coords = {}) {
  return Rng(DeriveSeed(root, stream, coords));
}

// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
// Used instead of std::uniform_real_distribution so sequences are identical
// across standard library implementations.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Lemire's nearly-divisionless method.
std::uint64_t UniformIndex(Rng& rng, std::uint64_t n);

// Standard normal via Box-Muller (one output per call, second discarded).
double StandardNormal(Rng& rng);

}  // namespace fedsel

#endif  // FEDSEL_RNG_H_
