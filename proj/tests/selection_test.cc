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

#include <cmath>
#include <numeric>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "fedsel/rng.h"

namespace fedsel {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

// Exact PE output distribution by brute force over the 2^d flip patterns.
// Entry d is the empty-sample outcome.
std::vector<double> PeOracle(const std::vector<std::uint8_t>& z, double keep) {
  const int d = static_cast<int>(z.size());
  std::vector<double> out(d + 1, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    double prob = 1.0;
    int support = 0;
    for (int j = 0; j < d; ++j) {
      const bool flipped = (mask >> j) & 1u;
      prob *= flipped ? 1 - keep : keep;
      support += (z[j] != flipped) ? 1 : 0;
    }
    if (support == 0) {
      out[d] += prob;
      continue;
    }
    for (int j = 0; j < d; ++j) {
      const bool flipped = (mask >> j) & 1u;
      if (z[j] != flipped) out[j] += prob / support;
    }
  }
  return out;
}

// Checks empirical frequencies against `exact` within 4 standard errors per
// cell. `draw` returns an index in [0, exact.size()).
template <typename Draw>
void ExpectFrequencies(const std::vector<double>& exact, int n, Draw draw) {
  std::vector<int> counts(exact.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[draw()];
  for (std::size_t j = 0; j < exact.size(); ++j) {
    const double se = std::sqrt(exact[j] * (1 - exact[j]) / n);
    EXPECT_NEAR(static_cast<double>(counts[j]) / n, exact[j],
                4 * se + 1e-12)
        << "cell " << j;
  }
}

TEST(RankAbsTest, RanksByMagnitude) {
  const std::vector<double> r = {0.1, -3.0, 2.0, -0.5};
  SelectionStatus s = RankAbs(r, 2);
  EXPECT_THAT(s.ranks, ElementsAre(1, 4, 3, 2));
  EXPECT_THAT(s.topk, ElementsAre(0, 1, 1, 0));
  EXPECT_EQ(s.k, 2);
  EXPECT_EQ(s.d(), 4);
}

TEST(RankAbsTest, TiesGoToAscendingIndex) {
  const std::vector<double> r = {1.0, -1.0, 1.0, 0.0};
  SelectionStatus s = RankAbs(r, 1);
  EXPECT_THAT(s.ranks, ElementsAre(2, 3, 4, 1));
  EXPECT_THAT(s.topk, ElementsAre(0, 0, 1, 0));
}

TEST(RankAbsTest, ClampsK) {
  const std::vector<double> r = {1.0, 2.0, 3.0};
  EXPECT_EQ(RankAbs(r, 0).k, 1);
  EXPECT_EQ(RankAbs(r, 9).k, 3);
}

TEST(StatusTest, FromTopkPutsSetBitsOnTop) {
  SelectionStatus s = StatusFromTopk({0, 1, 0, 1});
  EXPECT_EQ(s.k, 2);
  EXPECT_THAT(s.ranks, ElementsAre(1, 3, 2, 4));
}

TEST(ParseSelectionMechanismTest, NamesRoundTrip) {
  for (SelectionMechanism m : {SelectionMechanism::kExp,
                               SelectionMechanism::kPe,
                               SelectionMechanism::kPs}) {
    absl::StatusOr<SelectionMechanism> parsed =
        ParseSelectionMechanism(SelectionMechanismName(m));
    ASSERT_TRUE(parsed.ok());
    EXPECT_EQ(*parsed, m);
  }
}

TEST(ParseSelectionMechanismTest, UnknownNameListsValidSet) {
  absl::StatusOr<SelectionMechanism> parsed = ParseSelectionMechanism("topk");
  ASSERT_FALSE(parsed.ok());
  EXPECT_THAT(std::string(parsed.status().message()),
              HasSubstr("exp, pe, ps"));
}

TEST(ExpProbabilitiesTest, ThreeDimensionsWorkedExample) {
  // Ranks (1, 2, 3) with eps1 = 2: weights exp(2 z / 2) = (e, e^2, e^3).
  const std::vector<int> ranks = {1, 2, 3};
  std::vector<double> p = ExpProbabilities(ranks, 2.0);
  const double norm = std::exp(1) + std::exp(2) + std::exp(3);
  EXPECT_NEAR(p[0], std::exp(1) / norm, 1e-12);
  EXPECT_NEAR(p[1], std::exp(2) / norm, 1e-12);
  EXPECT_NEAR(p[2], std::exp(3) / norm, 1e-12);
  EXPECT_NEAR(p[0], 0.0900, 5e-5);
  EXPECT_NEAR(p[1], 0.2447, 5e-5);
  EXPECT_NEAR(p[2], 0.6652, 5e-5);
}

TEST(ExpProbabilitiesTest, ZeroBudgetIsUniform) {
  const std::vector<int> ranks = {3, 1, 5, 2, 4};
  for (double p : ExpProbabilities(ranks, 0.0)) EXPECT_NEAR(p, 0.2, 1e-15);
}

TEST(ExpProbabilitiesTest, ExtremeRatioIsExactlyExpEps) {
  const std::vector<int> ranks = {4, 2, 1, 6, 3, 5};
  for (double eps : {0.1, 1.0, 4.0, 30.0}) {
    std::vector<double> p = ExpProbabilities(ranks, eps);
    EXPECT_NEAR(p[3] / p[2], std::exp(eps), 1e-9 * std::exp(eps));
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(ExpProbabilitiesTest, StrictlyIncreasingInRank) {
  const std::vector<int> ranks = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> p = ExpProbabilities(ranks, 0.3);
  for (std::size_t j = 1; j < p.size(); ++j) EXPECT_GT(p[j], p[j - 1]);
}

TEST(ExpProbabilitiesTest, LargeBudgetStaysFinite) {
  const std::vector<int> ranks = {1, 2};
  std::vector<double> p = ExpProbabilities(ranks, 800.0);
  EXPECT_TRUE(std::isfinite(p[0]));
  EXPECT_NEAR(p[1], 1.0, 1e-12);
}

TEST(KeepProbabilityTest, RandomizedResponse) {
  EXPECT_NEAR(RandomizedResponseKeep(std::log(3.0)), 0.75, 1e-15);
  EXPECT_NEAR(RandomizedResponseKeep(0.0), 0.5, 1e-15);
}

TEST(KeepProbabilityTest, PeSplitsBudgetAcrossTheTwoChangedBits) {
  EXPECT_NEAR(PeKeepProbability(2 * std::log(3.0)), 0.75, 1e-15);
  const double s = std::sqrt(3.0);
  EXPECT_NEAR(PeKeepProbability(std::log(3.0)), s / (s + 1), 1e-15);
  EXPECT_NEAR(PeKeepProbability(0.0), 0.5, 1e-15);
}

TEST(KeepProbabilityTest, PsWorkedExample) {
  // d = 4, k = 1, eps1 = ln 3: p = 3 / (3 + 3).
  EXPECT_NEAR(PsTopProbability(4, 1, std::log(3.0)), 0.5, 1e-15);
  EXPECT_NEAR(PsTopProbability(10, 3, 0.0), 0.3, 1e-15);
}

TEST(PsTest, PerIndexRatioIsExpEps) {
  for (int d : {3, 5, 10}) {
    for (int k = 1; k < d; ++k) {
      const double eps = 1.7;
      const double p = PsTopProbability(d, k, eps);
      EXPECT_NEAR((p / k) / ((1 - p) / (d - k)), std::exp(eps), 1e-12);
    }
  }
}

TEST(PeTest, ExpectedSupportWorkedExample) {
  // keep 0.75, d = 4, k = 1: l = 0.75 + 3 * 0.25.
  const double p = PeKeepProbability(2 * std::log(3.0));
  EXPECT_NEAR(1 * p + 3 * (1 - p), 1.5, 1e-15);
}

TEST(PeTest, EmptySampleFrequencyAtZeroBudget) {
  // d = 2, k = 1, keep 0.5: four patterns, one of them empty.
  SelectionStatus s = StatusFromTopk({1, 0});
  Rng rng = MakeRng(11, Stream::kMonteCarlo);
  constexpr int kDraws = 400000;
  int bottoms = 0;
  for (int i = 0; i < kDraws; ++i) bottoms += PeSelect(s, 0.0, rng) ? 0 : 1;
  EXPECT_NEAR(static_cast<double>(bottoms) / kDraws, 0.25,
              4 * std::sqrt(0.25 * 0.75 / kDraws));
}

TEST(SamplingConsistencyTest, ExpMatchesExactDistribution) {
  const std::vector<int> ranks = {2, 5, 1, 4, 3};
  const double eps = 1.5;
  std::vector<double> exact(5);
  double norm = 0.0;
  for (int j = 0; j < 5; ++j) norm += std::exp(eps * ranks[j] / 4.0);
  for (int j = 0; j < 5; ++j) exact[j] = std::exp(eps * ranks[j] / 4.0) / norm;
  SelectionStatus s = StatusFromRanks(ranks, 1);
  Rng rng = MakeRng(12, Stream::kMonteCarlo);
  ExpectFrequencies(exact, 1000000, [&] { return *ExpSelect(s, eps, rng); });
}

TEST(SamplingConsistencyTest, PeMatchesEnumeration) {
  const std::vector<std::uint8_t> z = {0, 1, 0, 0, 1, 0};
  const double eps = 1.0;
  const std::vector<double> exact = PeOracle(z, PeKeepProbability(eps));
  EXPECT_NEAR(std::accumulate(exact.begin(), exact.end(), 0.0), 1.0, 1e-12);
  SelectionStatus s = StatusFromTopk(z);
  Rng rng = MakeRng(13, Stream::kMonteCarlo);
  ExpectFrequencies(exact, 1000000, [&] {
    SelectionOutcome o = PeSelect(s, eps, rng);
    return o ? *o : 6;
  });
}

TEST(SamplingConsistencyTest, PsMatchesTwoPoolLaw) {
  const std::vector<std::uint8_t> z = {0, 1, 0, 1, 0, 0, 0};
  const double eps = 2.0;
  const double top = std::exp(eps) * 2 / (5 + std::exp(eps) * 2);
  std::vector<double> exact(7);
  for (int j = 0; j < 7; ++j) exact[j] = z[j] ? top / 2 : (1 - top) / 5;
  SelectionStatus s = StatusFromTopk(z);
  Rng rng = MakeRng(14, Stream::kMonteCarlo);
  ExpectFrequencies(exact, 1000000, [&] { return *PsSelect(s, eps, rng); });
}

TEST(SamplingConsistencyTest, ZeroBudgetIsUniformForEveryMechanism) {
  const std::vector<double> r = {0.3, -2.0, 0.1, 1.0};
  SelectionStatus s = RankAbs(r, 1);
  const std::vector<double> uniform(4, 0.25);
  Rng rng = MakeRng(15, Stream::kMonteCarlo);
  ExpectFrequencies(uniform, 200000, [&] {
    return **Select(SelectionMechanism::kExp, s, 0.0, rng);
  });
  ExpectFrequencies(uniform, 200000, [&] {
    return **Select(SelectionMechanism::kPs, s, 0.0, rng);
  });
}

TEST(SelectTest, RejectsBadBudget) {
  SelectionStatus s = StatusFromTopk({1, 0, 0});
  Rng rng = MakeRng(1, Stream::kMonteCarlo);
  EXPECT_FALSE(Select(SelectionMechanism::kPs, s, -0.1, rng).ok());
  EXPECT_FALSE(Select(SelectionMechanism::kPe, s, std::nan(""), rng).ok());
}

TEST(SelectTest, PsRejectsFullTopk) {
  SelectionStatus s = StatusFromTopk({1, 1, 1});
  Rng rng = MakeRng(1, Stream::kMonteCarlo);
  EXPECT_EQ(PsSelect(s, 1.0, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(SelectTest, ExpRejectsSingleDimension) {
  SelectionStatus s = StatusFromRanks({1}, 1);
  Rng rng = MakeRng(1, Stream::kMonteCarlo);
  EXPECT_FALSE(ExpSelect(s, 1.0, rng).ok());
}

TEST(SelectTest, OnlyPeProducesEmptySample) {
  SelectionStatus s = StatusFromTopk({1, 0});
  Rng rng = MakeRng(2, Stream::kMonteCarlo);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(Select(SelectionMechanism::kPs, s, 0.0, rng)->has_value());
    EXPECT_TRUE(Select(SelectionMechanism::kExp, s, 0.0, rng)->has_value());
  }
}

}  // namespace
}  // namespace fedsel
