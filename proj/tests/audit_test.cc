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


#include "fedsel/audit.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace fedsel::audit {
namespace {

using ::testing::HasSubstr;

MechanismModel Model(SelectionMechanism m) {
  return MechanismModel::Shipped(m);
}

TEST(ExactDistributionTest, PsMatchesDefinition) {
  const int d = 5;
  const int k = 2;
  const double eps = 1.0;
  const SelectionStatus status = StatusFromTopk({0, 1, 0, 1, 0});
  auto p = ExactDistribution(Model(SelectionMechanism::kPs), status, eps);
  ASSERT_TRUE(p.ok()) << p.status();
  const double top = PsTopProbability(d, k, eps);
  for (int j = 0; j < d; ++j) {
    const double want = status.topk[j] ? top / k : (1 - top) / (d - k);
    EXPECT_NEAR((*p)[j], want, 1e-12) << j;
  }
  EXPECT_EQ((*p)[d], 0.0);
}

TEST(ExactDistributionTest, RowsSumToOne) {
  for (auto mech : {SelectionMechanism::kExp, SelectionMechanism::kPe,
                    SelectionMechanism::kPs}) {
    for (double eps : {0.0, 0.3, 2.0, 6.0}) {
      const SelectionStatus status = RankAbs(
          std::vector<double>{0.1, -0.9, 0.4, 0.0, 0.7, -0.2}, 2);
      auto p = ExactDistribution(Model(mech), status, eps);
      ASSERT_TRUE(p.ok());
      EXPECT_NEAR(std::accumulate(p->begin(), p->end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST(ExactDistributionTest, ExpUniformWithoutBudget) {
  auto p = ExactDistribution(Model(SelectionMechanism::kExp),
                             StatusFromRanks({3, 1, 4, 2}, 1), 0.0);
  ASSERT_TRUE(p.ok());
  for (int j = 0; j < 4; ++j) EXPECT_NEAR((*p)[j], 0.25, 1e-15);
}

TEST(EnumeratePeTest, MatchesClosedForms) {
  for (int d : {2, 5, 9}) {
    for (int k : {1, 2}) {
      for (double p : {0.5, 0.62, 0.9}) {
        std::vector<std::uint8_t> topk(d, 0);
        for (int j = 0; j < k; ++j) topk[d - 1 - j] = 1;
        auto m = EnumeratePe(StatusFromTopk(topk), p);
        ASSERT_TRUE(m.ok());
        EXPECT_NEAR(m->bottom, std::pow(1 - p, k) * std::pow(p, d - k), 1e-12);
        EXPECT_NEAR(m->expected_support, k * p + (d - k) * (1 - p), 1e-12);
      }
    }
  }
}

TEST(EnumeratePeTest, FairCoinsGiveQuarterBottom) {
  auto m = EnumeratePe(StatusFromTopk({1, 0}), PeKeepProbability(0.0));
  ASSERT_TRUE(m.ok());
  EXPECT_NEAR(m->bottom, 0.25, 1e-15);
  EXPECT_FALSE(EnumeratePe(StatusFromTopk(std::vector<std::uint8_t>(
                               kMaxEnumerationDim + 1, 0)),
                           0.5)
                   .ok());
}

TEST(LdpRatioCheckTest, PsRatioMatchesAnalyticWorstCase) {
  for (double eps : {0.2, 1.0, 3.0}) {
    const int d = 6;
    const int k = 2;
    auto r = LdpRatioCheck(Model(SelectionMechanism::kPs), d, k, eps);
    ASSERT_TRUE(r.ok());
    const double top = PsTopProbability(d, k, eps);
    const double analytic = (top / k) / ((1 - top) / (d - k));
    EXPECT_NEAR(r->max_ratio, analytic, 1e-9 * analytic);
    EXPECT_TRUE(r->pass);
    EXPECT_EQ(r->status_vectors, 15u);  // C(6, 2)
  }
}

TEST(LdpRatioCheckTest, ExpAttainsBound) {
  auto r = LdpRatioCheck(Model(SelectionMechanism::kExp), 4, 1, 1.5);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->status_vectors, 24u);
  EXPECT_NEAR(r->max_ratio, std::exp(1.5), 1e-9);
  EXPECT_TRUE(r->pass);
}

TEST(LdpRatioCheckTest, UnsplitPeCoinsViolateBound) {
  // Keeping each bit with probability e^eps / (e^eps + 1) costs eps per bit;
  // swapping one top coordinate flips two bits.
  MechanismModel unsplit = Model(SelectionMechanism::kPe);
  unsplit.pe_keep = RandomizedResponseKeep;
  const double eps = 1.0;
  const double p = std::exp(eps) / (std::exp(eps) + 1);
  const double num = p * p + p * (1 - p) / 2;
  const double den = (1 - p) * (1 - p) + p * (1 - p) / 2;
  auto r = LdpRatioCheck(unsplit, 2, 1, eps);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r->max_ratio, num / den, 1e-12);
  EXPECT_GT(r->max_ratio, std::exp(eps));
  EXPECT_FALSE(r->pass);

  auto shipped = LdpRatioCheck(Model(SelectionMechanism::kPe), 2, 1, eps);
  ASSERT_TRUE(shipped.ok());
  EXPECT_TRUE(shipped->pass);
}

TEST(LdpRatioCheckTest, ZeroBudgetIsIndistinguishable) {
  for (auto mech : {SelectionMechanism::kExp, SelectionMechanism::kPe,
                    SelectionMechanism::kPs}) {
    auto r = LdpRatioCheck(Model(mech), 4, 1, 0.0);
    ASSERT_TRUE(r.ok());
    EXPECT_NEAR(r->max_ratio, 1.0, 1e-12);
  }
}

TEST(LdpRatioCheckTest, Rejections) {
  EXPECT_FALSE(LdpRatioCheck(Model(SelectionMechanism::kPs), 0, 1, 1).ok());
  EXPECT_FALSE(LdpRatioCheck(Model(SelectionMechanism::kPe), 3, 4, 1).ok());
  EXPECT_FALSE(LdpRatioCheck(Model(SelectionMechanism::kExp), 11, 1, 1).ok());
}

TEST(SelectionGridTest, DefaultGridPasses) {
  const std::vector<MechanismModel> models = {
      Model(SelectionMechanism::kExp), Model(SelectionMechanism::kPe),
      Model(SelectionMechanism::kPs)};
  SelectionGrid grid;
  grid.dims = {2, 3, 5};
  const std::vector<GridRow> rows = RunSelectionGrid(models, grid);
  EXPECT_FALSE(rows.empty());
  for (const GridRow& row : rows) {
    EXPECT_TRUE(row.pass) << row.mechanism << " d=" << row.d << " k=" << row.k
                          << " eps=" << row.epsilon;
    EXPECT_LE(row.k, row.d);
  }
}

TEST(ValueRatioTest, DuchiAttainsBoundOthersStayBelow) {
  for (double eps : {0.3, 1.0, 3.0}) {
    auto duchi = MakePerturber(PerturbationBackend::kDuchi, eps);
    ASSERT_TRUE(duchi.ok());
    EXPECT_NEAR(MaxValueRatio(**duchi), std::exp(eps), 1e-9);
    for (auto backend : {PerturbationBackend::kPiecewise, PerturbationBackend::kHybrid}) {
      auto p = MakePerturber(backend, eps);
      ASSERT_TRUE(p.ok());
      const double ratio = MaxValueRatio(**p);
      EXPECT_LE(ratio, std::exp(eps) * (1 + 1e-9));
      EXPECT_GE(ratio, 1.0);
    }
  }
}

TEST(EstimateMeanTest, UnbiasedWithinStandardErrors) {
  auto pm = MakePerturber(PerturbationBackend::kPiecewise, 1.0);
  ASSERT_TRUE(pm.ok());
  for (double v : {-1.0, -0.3, 0.0, 0.8}) {
    const MeanEstimate e = EstimateMean(**pm, v, 100000, 5);
    EXPECT_EQ(e.n, 100000u);
    EXPECT_NEAR(e.mean, v, 4 * e.standard_error());
    EXPECT_LE(e.max_abs, (*pm)->bound() + 1e-12);
    EXPECT_NEAR(e.stddev * e.stddev, (*pm)->Variance(v),
                0.05 * (*pm)->Variance(v));
  }
}

class CompositionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto b = AllocateBudget(2.0, 2, 0.1);
    ASSERT_TRUE(b.ok());
    budget_ = *b;
    for (ClientId c : participants_) {
      for (int e = 1; e <= 2; ++e) {
        ledger_.RecordSpend(c, e, budget_.epsilon_round);
      }
    }
  }

  CompositionInput Input() const {
    return {.ledger = &ledger_,
            .budget = budget_,
            .participants = participants_,
            .selection_ratio = std::exp(budget_.epsilon_select),
            .value_ratio = std::exp(budget_.epsilon_value)};
  }

  PrivacyBudget budget_;
  BudgetLedger ledger_;
  std::vector<ClientId> participants_ = {4, 7, 9};
};

TEST_F(CompositionTest, HonestLedgerPasses) {
  const CompositionReport r = CompositionCheck(Input());
  EXPECT_TRUE(r.pass) << (r.failures.empty() ? "" : r.failures[0]);
  EXPECT_NEAR(r.combined_bound, std::exp(1.0), 1e-12);
}

TEST_F(CompositionTest, DoubleChargeFails) {
  ledger_.RecordSpend(7, 1, budget_.epsilon_round);
  const CompositionReport r = CompositionCheck(Input());
  EXPECT_FALSE(r.pass);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_THAT(r.failures[0], HasSubstr("client 7 epoch 1"));
}

TEST_F(CompositionTest, StrangerAndLateEpochFail) {
  ledger_.RecordSpend(99, 1, 0.1);
  EXPECT_FALSE(CompositionCheck(Input()).pass);
  BudgetLedger late = ledger_;
  CompositionInput in = Input();
  late.RecordSpend(4, 3, 0.0);
  in.ledger = &late;
  EXPECT_FALSE(CompositionCheck(in).pass);
}

TEST_F(CompositionTest, StageRatiosAboveBudgetFail) {
  CompositionInput in = Input();
  in.selection_ratio = std::exp(budget_.epsilon_select) * 1.01;
  EXPECT_FALSE(CompositionCheck(in).pass);
  in = Input();
  in.value_ratio = std::exp(budget_.epsilon_value) * 1.01;
  EXPECT_FALSE(CompositionCheck(in).pass);
  in = Input();
  in.ledger = nullptr;
  EXPECT_FALSE(CompositionCheck(in).pass);
}

TEST(AggregationErrorTest, ShrinksWithMoreClients) {
  auto small = MeasureAggregationError(10, 500, 1.0, 200,
                                       PerturbationBackend::kPiecewise, 1);
  auto large = MeasureAggregationError(10, 1000, 1.0, 200,
                                       PerturbationBackend::kPiecewise, 1);
  ASSERT_TRUE(small.ok() && large.ok());
  EXPECT_EQ(small->samples.size(), 200u);
  EXPECT_NEAR(large->median / small->median, 1 / std::sqrt(2.0),
              0.25 / std::sqrt(2.0));
}

TEST(AggregationErrorTest, DeterministicAndValidated) {
  auto a = MeasureAggregationError(4, 50, 1.0, 20, PerturbationBackend::kDuchi,
                                   3);
  auto b = MeasureAggregationError(4, 50, 1.0, 20, PerturbationBackend::kDuchi,
                                   3);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->samples, b->samples);
  EXPECT_FALSE(
      MeasureAggregationError(0, 5, 1.0, 2, PerturbationBackend::kPiecewise, 1).ok());
}

TEST(AccumulationVarianceTest, RatioIsAlphaSquared) {
  auto v = CompareAccumulationVariance(0.1, 100, 10.0,
                                       PerturbationBackend::kPiecewise, 1.0, 20000, 2);
  ASSERT_TRUE(v.ok());
  EXPECT_NEAR(v->ratio(), 0.01, 0.002);
  EXPECT_FALSE(CompareAccumulationVariance(1.0, 100, 10.0,
                                           PerturbationBackend::kPiecewise, 1.0, 10, 2)
                   .ok());
}

}  // namespace
}  // namespace fedsel::audit
