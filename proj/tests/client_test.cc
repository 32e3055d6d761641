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

#include "fedsel/client.h"

#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "fedsel/rng.h"

namespace fedsel {
namespace {

using ::testing::ElementsAre;

PrivacyBudget Budget(double eps, double mu) {
  absl::StatusOr<PrivacyBudget> b = AllocateBudget(eps, 1, mu);
  EXPECT_TRUE(b.ok());
  return *b;
}

// Large selection budget so PS picks the top coordinate with probability
// 1 - O(e^-eps1).
ClientConfig IdentityConfig(double eta, int d, SelectionMechanism sel,
                            double eps1 = 200.0) {
  PrivacyBudget b = Budget(eps1 + 1.0, eps1 / (eps1 + 1.0));
  absl::StatusOr<ClientConfig> cfg = MakeClientConfig(
      ModelKind::kLogistic, eta, 1, d, b, sel, PerturbationBackend::kNone);
  EXPECT_TRUE(cfg.ok()) << cfg.status();
  return *cfg;
}

TEST(AccumulateTest, Examples) {
  ResidualState s(2);
  const std::vector<double> g = {0.2, -0.1};
  ASSERT_TRUE(Accumulate(s, g).ok());
  EXPECT_THAT(s.r, ElementsAre(0.2, -0.1));
  EXPECT_THAT(s.r_prev, ElementsAre(0.0, 0.0));

  ResidualState t(2);
  t.r = {0.5, 0.0};
  const std::vector<double> h = {0.2, 0.0};
  ASSERT_TRUE(Accumulate(t, h).ok());
  EXPECT_NEAR(t.r[0], 0.7, 1e-15);
  EXPECT_THAT(t.r_prev, ElementsAre(0.5, 0.0));
}

TEST(AccumulateTest, LinearOverRounds) {
  ResidualState s(3);
  const std::vector<double> g = {0.25, -0.5, 1.0};
  for (int t = 0; t < 8; ++t) ASSERT_TRUE(Accumulate(s, g).ok());
  EXPECT_THAT(s.r, ElementsAre(2.0, -4.0, 8.0));
}

TEST(AccumulateTest, RejectsDimensionMismatch) {
  ResidualState s(3);
  const std::vector<double> g = {1.0, 2.0};
  EXPECT_EQ(Accumulate(s, g).code(), absl::StatusCode::kInvalidArgument);
}

TEST(PrivatizeGradientTest, MomentumThenClipHandTrace) {
  // r_prev_0 = 0.5, g_0 = 0.2, eta = 0.9: s = 0.7 + 0.45 = 1.15 -> 1.0.
  ClientConfig cfg = IdentityConfig(0.9, 2, SelectionMechanism::kPs);
  ResidualState s(2);
  s.r = {0.5, 0.0};
  const std::vector<double> g = {0.2, 0.0};
  Rng rng = MakeRng(41, Stream::kClientUpdate);
  absl::StatusOr<SparseUpdate> u = PrivatizeGradient(g, s, cfg, rng);
  ASSERT_TRUE(u.ok());
  ASSERT_FALSE(u->is_bottom());
  EXPECT_EQ(*u->index, 0);
  EXPECT_EQ(u->value->value, 1.0);
  EXPECT_THAT(s.r, ElementsAre(0.0, 0.0));
}

TEST(PrivatizeGradientTest, NoMomentumSendsResidual) {
  ClientConfig cfg = IdentityConfig(0.0, 3, SelectionMechanism::kPs);
  ResidualState s(3);
  s.r = {0.1, 0.3, 0.0};
  const std::vector<double> g = {0.0, 0.2, -0.05};
  Rng rng = MakeRng(42, Stream::kClientUpdate);
  absl::StatusOr<SparseUpdate> u = PrivatizeGradient(g, s, cfg, rng);
  ASSERT_TRUE(u.ok());
  EXPECT_EQ(*u->index, 1);
  EXPECT_NEAR(u->value->value, 0.5, 1e-15);
}

TEST(PrivatizeGradientTest, ConservesUnselectedResidual) {
  PrivacyBudget b = Budget(2.0, 0.1);
  absl::StatusOr<ClientConfig> cfg =
      MakeClientConfig(ModelKind::kLogistic, 0.9, 2, 6, b,
                       SelectionMechanism::kPe, PerturbationBackend::kPiecewise);
  ASSERT_TRUE(cfg.ok());
  Rng rng = MakeRng(43, Stream::kClientUpdate);
  ResidualState s(6);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> g(6);
    for (double& v : g) v = 2 * Uniform01(rng) - 1;
    const std::vector<double> before = s.r;
    absl::StatusOr<SparseUpdate> u = PrivatizeGradient(g, s, *cfg, rng);
    ASSERT_TRUE(u.ok());
    for (int j = 0; j < 6; ++j) {
      if (!u->is_bottom() && *u->index == j) {
        EXPECT_EQ(s.r[j], 0.0);
      } else {
        EXPECT_EQ(s.r[j], before[j] + g[j]);
      }
    }
    EXPECT_EQ(u->value.has_value(), !u->is_bottom());
  }
}

TEST(PrivatizeGradientTest, EmptySampleKeepsResidual) {
  // PE with eps1 = 0 flips each bit with probability 1/2, so d = 2 returns
  // the empty sample a quarter of the time.
  PrivacyBudget b = Budget(1.0, 0.0);
  absl::StatusOr<ClientConfig> cfg =
      MakeClientConfig(ModelKind::kLogistic, 0.5, 1, 2, b,
                       SelectionMechanism::kPe, PerturbationBackend::kDuchi);
  ASSERT_TRUE(cfg.ok());
  Rng rng = MakeRng(44, Stream::kClientUpdate);
  int bottoms = 0;
  for (int i = 0; i < 200; ++i) {
    ResidualState s(2);
    s.r = {0.3, -0.4};
    const std::vector<double> g = {0.1, 0.1};
    absl::StatusOr<SparseUpdate> u = PrivatizeGradient(g, s, *cfg, rng);
    ASSERT_TRUE(u.ok());
    if (u->is_bottom()) {
      ++bottoms;
      EXPECT_FALSE(u->value.has_value());
      EXPECT_NEAR(s.r[0], 0.4, 1e-15);
      EXPECT_NEAR(s.r[1], -0.3, 1e-15);
    }
  }
  EXPECT_GT(bottoms, 0);
}

TEST(PrivatizeGradientTest, SameSeedSameUpdate) {
  PrivacyBudget b = Budget(2.0, 0.1);
  absl::StatusOr<ClientConfig> cfg =
      MakeClientConfig(ModelKind::kLogistic, 0.9, 3, 20, b,
                       SelectionMechanism::kPs, PerturbationBackend::kHybrid);
  ASSERT_TRUE(cfg.ok());
  std::vector<double> g(20);
  for (int j = 0; j < 20; ++j) g[j] = std::sin(j);
  ResidualState a(20);
  ResidualState c(20);
  Rng r1 = MakeRng(45, Stream::kClientUpdate, {1, 2});
  Rng r2 = MakeRng(45, Stream::kClientUpdate, {1, 2});
  absl::StatusOr<SparseUpdate> u1 = PrivatizeGradient(g, a, *cfg, r1);
  absl::StatusOr<SparseUpdate> u2 = PrivatizeGradient(g, c, *cfg, r2);
  EXPECT_EQ(*u1->index, *u2->index);
  EXPECT_EQ(u1->value->value, u2->value->value);
  EXPECT_EQ(a.r, c.r);
}

TEST(LocalUpdateTest, UsesModelGradient) {
  ClientConfig cfg = IdentityConfig(0.0, 3, SelectionMechanism::kPs);
  ModelState m{{0.0, 0.0, 0.0}, 0.1, 0.0};
  const std::vector<double> x = {0.2, -0.8, 0.4};
  ResidualState s(3);
  Rng rng = MakeRng(46, Stream::kClientUpdate);
  // Gradient at w = 0 is -y x / 2 = (-0.1, 0.4, -0.2).
  absl::StatusOr<SparseUpdate> u = LocalUpdate(m, {x, 1}, s, cfg, rng);
  ASSERT_TRUE(u.ok());
  EXPECT_EQ(*u->index, 1);
  EXPECT_NEAR(u->value->value, 0.4, 1e-15);
  EXPECT_NEAR(s.r[0], -0.1, 1e-15);
  EXPECT_NEAR(s.r[2], -0.2, 1e-15);
}

TEST(MakeClientConfigTest, RejectsInvalidArguments) {
  PrivacyBudget b = Budget(2.0, 0.1);
  const auto make = [&](double eta, int k, int d, SelectionMechanism sel) {
    return MakeClientConfig(ModelKind::kLogistic, eta, k, d, b, sel,
                            PerturbationBackend::kPiecewise);
  };
  EXPECT_FALSE(make(-0.1, 1, 5, SelectionMechanism::kPe).ok());
  EXPECT_FALSE(make(0.9, 0, 5, SelectionMechanism::kPe).ok());
  EXPECT_FALSE(make(0.9, 6, 5, SelectionMechanism::kPe).ok());
  EXPECT_FALSE(make(0.9, 5, 5, SelectionMechanism::kPs).ok());
  EXPECT_FALSE(make(0.9, 1, 1, SelectionMechanism::kExp).ok());
  EXPECT_TRUE(make(0.9, 5, 5, SelectionMechanism::kPe).ok());
  PrivacyBudget no_value = Budget(2.0, 1.0);
  EXPECT_FALSE(MakeClientConfig(ModelKind::kLogistic, 0.9, 1, 5, no_value,
                                SelectionMechanism::kPs,
                                PerturbationBackend::kPiecewise)
                   .ok());
}

}  // namespace
}  // namespace fedsel
