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

#include "fedsel/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fedsel {

absl::StatusOr<SelectionMechanism> ParseSelectionMechanism(
    absl::string_view name) {
  if (name == "exp") return SelectionMechanism::kExp;
  if (name == "pe") return SelectionMechanism::kPe;
  if (name == "ps") return SelectionMechanism::kPs;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown selection mechanism '", name, "'; valid: exp, pe, ps"));
}

absl::string_view SelectionMechanismName(SelectionMechanism mechanism) {
  switch (mechanism) {
    case SelectionMechanism::kExp:
      return "exp";
    case SelectionMechanism::kPe:
      return "pe";
    case SelectionMechanism::kPs:
      return "ps";
  }
  return "?";
}

namespace {

std::vector<std::uint8_t> TopkFromRanks(std::span<const int> ranks, int k) {
  const int d = static_cast<int>(ranks.size());
  std::vector<std::uint8_t> topk(ranks.size());
  for (int j = 0; j < d; ++j) topk[j] = ranks[j] > d - k ? 1 : 0;
  return topk;
}

int ClampK(int k, int d) { return std::clamp(k, 1, std::max(d, 1)); }

}  // namespace

SelectionStatus RankAbs(std::span<const double> r, int k) {
  const int d = static_cast<int>(r.size());
  // Pair order is (|r_j|, j), which is exactly the tie rule.
  std::vector<std::pair<double, int>> order(r.size());
  for (int j = 0; j < d; ++j) order[j] = {std::fabs(r[j]), j};
  std::sort(order.begin(), order.end());
  SelectionStatus status;
  status.k = ClampK(k, d);
  status.ranks.resize(r.size());
  for (int pos = 0; pos < d; ++pos) status.ranks[order[pos].second] = pos + 1;
  status.topk = TopkFromRanks(status.ranks, status.k);
  return status;
}

SelectionStatus StatusFromRanks(std::vector<int> ranks, int k) {
  SelectionStatus status;
  status.k = ClampK(k, static_cast<int>(ranks.size()));
  status.ranks = std::move(ranks);
  status.topk = TopkFromRanks(status.ranks, status.k);
  return status;
}

SelectionStatus StatusFromTopk(std::vector<std::uint8_t> topk) {
  const int d = static_cast<int>(topk.size());
  const int k = static_cast<int>(std::count(topk.begin(), topk.end(), 1));
  SelectionStatus status;
  status.k = k;
  status.ranks.resize(topk.size());
  int low = 1;
  int high = d - k + 1;
  for (int j = 0; j < d; ++j) status.ranks[j] = topk[j] ? high++ : low++;
  status.topk = std::move(topk);
  return status;
}

std::vector<double> ExpProbabilities(std::span<const int> ranks, double eps1) {
  const int d = static_cast<int>(ranks.size());
  std::vector<double> p(ranks.size());
  if (d < 2) return p;
  // Shifted by the largest rank so every weight is in (0, 1].
  const double scale = eps1 / (d - 1);
  double sum = 0.0;
  for (int z = 1; z <= d; ++z) sum += std::exp(scale * (z - d));
  for (int j = 0; j < d; ++j) p[j] = std::exp(scale * (ranks[j] - d)) / sum;
  return p;
}

double RandomizedResponseKeep(double eps) {
  // e/(e+1) == 1/(1+e^-eps), stable for large eps.
  return 1.0 / (1.0 + std::exp(-eps));
}

double PeKeepProbability(double eps1) {
  // Two admissible status vectors differ in two bits, so each bit gets half.
  return RandomizedResponseKeep(eps1 / 2);
}

double PsTopProbability(int d, int k, double eps1) {
  const double weighted_top = std::exp(eps1) * k;
  return weighted_top / ((d - k) + weighted_top);
}

absl::StatusOr<int> ExpSelect(const SelectionStatus& status, double eps1,
                              Rng& rng) {
  const int d = status.d();
  if (d < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("EXP selection needs d >= 2, got d = ", d));
  }
  const std::vector<double> p = ExpProbabilities(status.ranks, eps1);
  double u = Uniform01(rng);
  for (int j = 0; j < d - 1; ++j) {
    if (u < p[j]) return j;
    u -= p[j];
  }
  return d - 1;
}

SelectionOutcome PeSelect(const SelectionStatus& status, double eps1,
                          Rng& rng) {
  const double keep = PeKeepProbability(eps1);
  // Branch-free: the flips are coin tosses the predictor cannot learn.
  std::vector<int> support(status.topk.size());
  std::size_t size = 0;
  for (int j = 0; j < status.d(); ++j) {
    const bool kept = Uniform01(rng) < keep;
    support[size] = j;
    size += kept == (status.topk[j] != 0);
  }
  if (size == 0) return std::nullopt;
  return support[UniformIndex(rng, size)];
}

absl::StatusOr<int> PsSelect(const SelectionStatus& status, double eps1,
                             Rng& rng) {
  const int d = status.d();
  const int k = status.k;
  if (k < 1 || k >= d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "PS selection needs 1 <= k < d, got k = ", k, ", d = ", d));
  }
  const bool from_top = Uniform01(rng) < PsTopProbability(d, k, eps1);
  const std::uint8_t wanted = from_top ? 1 : 0;
  auto target =
      static_cast<int>(UniformIndex(rng, from_top ? k : d - k));
  for (int j = 0; j < d; ++j) {
    if (status.topk[j] != wanted) continue;
    if (target-- == 0) return j;
  }
  return absl::InternalError("PS pool sizes inconsistent with k");
}

absl::StatusOr<SelectionOutcome> Select(SelectionMechanism mechanism,
                                        const SelectionStatus& status,
                                        double eps1, Rng& rng) {
  if (!std::isfinite(eps1) || eps1 < 0.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "selection epsilon must be finite and non-negative, got ", eps1));
  }
  switch (mechanism) {
    case SelectionMechanism::kExp: {
      absl::StatusOr<int> j = ExpSelect(status, eps1, rng);
      if (!j.ok()) return j.status();
      return SelectionOutcome(*j);
    }
    case SelectionMechanism::kPe:
      return PeSelect(status, eps1, rng);
    case SelectionMechanism::kPs: {
      absl::StatusOr<int> j = PsSelect(status, eps1, rng);
      if (!j.ok()) return j.status();
      return SelectionOutcome(*j);
    }
  }
  return absl::InternalError("unhandled selection mechanism");
}

}  // namespace fedsel
