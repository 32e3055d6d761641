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

#ifndef FEDSEL_SELECTION_H_
#define FEDSEL_SELECTION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedsel/rng.h"

namespace fedsel {

// Private dimension selection: given a client's accumulated vector, pick one
// coordinate to transmit under an epsilon1-LDP guarantee on the Top-k status.
enum class SelectionMechanism {
  kExp,  // exponential mechanism over ranks (Top-1)
  kPe,   // randomized response on the Top-k bit vector, then uniform pick
  kPs,   // biased sampling between the Top-k pool and the rest
};

absl::StatusOr<SelectionMechanism> ParseSelectionMechanism(
    absl::string_view name);
absl::string_view SelectionMechanismName(SelectionMechanism mechanism);

// Ranking view and Top-k view of the same vector.
struct SelectionStatus {
  // ranks[j] in 1..d; d is the largest |r_j|. Ties broken by ascending index
  // (the lower index gets the lower rank).
  std::vector<int> ranks;
  // topk[j] == 1 iff ranks[j] > d - k.
  std::vector<std::uint8_t> topk;
  int k = 1;

  int d() const { return static_cast<int>(ranks.size()); }
};

// Sorts |r| ascending and derives both views. k is clamped to [1, d].
SelectionStatus RankAbs(std::span<const double> r, int k);

// Builds a status from an explicit rank permutation (1-based). Used by the
// audit, which enumerates status vectors directly.
SelectionStatus StatusFromRanks(std::vector<int> ranks, int k);

// Builds a status from a binary Top-k vector. Ranks are assigned so the set
// bits hold the top ranks, in index order.
SelectionStatus StatusFromTopk(std::vector<std::uint8_t> topk);

// Index, or nullopt for the empty-sample outcome (only PE produces it).
using SelectionOutcome = std::optional<int>;

// Output distribution of EXP for the given ranks:
// p_j = exp(eps1 z_j / (d-1)) / sum_i exp(eps1 z_i / (d-1)). Requires d >= 2.
std::vector<double> ExpProbabilities(std::span<const int> ranks, double eps1);

// Per-bit randomized response: keep with probability e^eps / (e^eps + 1).
double RandomizedResponseKeep(double eps);

// Probability that PE keeps a status bit. Moving one Top-k slot changes two
// bits of z, so each bit is randomized with eps1 / 2:
// e^(eps1/2) / (e^(eps1/2) + 1). Keeping with e^eps1 / (e^eps1 + 1) instead
// is not eps1-LDP (d = 2, k = 1, eps1 = 1 gives an output ratio of 3.71).
double PeKeepProbability(double eps1);

// Probability that PS draws from the Top-k pool:
// e^eps1 k / (d - k + e^eps1 k).
double PsTopProbability(int d, int k, double eps1);

// All three samplers take eps1 >= 0 (eps1 == 0 yields uniform selection).
absl::StatusOr<int> ExpSelect(const SelectionStatus& status, double eps1,
                              Rng& rng);
SelectionOutcome PeSelect(const SelectionStatus& status, double eps1,
                          Rng& rng);
absl::StatusOr<int> PsSelect(const SelectionStatus& status, double eps1,
                             Rng& rng);

// Validates eps1 and dispatches.
absl::StatusOr<SelectionOutcome> Select(SelectionMechanism mechanism,
                                        const SelectionStatus& status,
                                        double eps1, Rng& rng);

}  // namespace fedsel

#endif  // FEDSEL_SELECTION_H_
