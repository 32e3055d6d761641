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


#include "fedsel/experiment.h"

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace fedsel {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.dataset = "syn:10,400,0.2,0.95";
  c.epsilon = 2.0;
  c.m_fraction = 0.05;
  c.folds = 2;
  c.eval_every = 1;
  return c;
}

TEST(ConfigTest, ParsesKeysCommentsAndAliases) {
  auto c = ParseConfigText(
      "# comment\n"
      "name = demo\n"
      "select = pe   # trailing\n"
      "perturb=duchi\n"
      "eps = 4\n"
      "epochs = 2\n"
      "mu = auto\n"
      "seed = 42\n");
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->name, "demo");
  EXPECT_EQ(c->selection, "pe");
  EXPECT_EQ(c->perturbation, "duchi");
  EXPECT_EQ(c->epsilon, 4.0);
  EXPECT_EQ(c->epochs, 2);
  EXPECT_EQ(c->mu, "auto");
  EXPECT_EQ(c->seed, 42u);
}

TEST(ConfigTest, ErrorsNameTheLine) {
  auto bad = ParseConfigText("eps = 1\nnope = 3\n");
  ASSERT_FALSE(bad.ok());
  EXPECT_THAT(bad.status().message(), HasSubstr("2"));
  EXPECT_THAT(bad.status().message(), HasSubstr("nope"));
  EXPECT_FALSE(ParseConfigText("eps = abc\n").ok());
  EXPECT_FALSE(ParseConfigText("just words\n").ok());
  EXPECT_FALSE(LoadConfigFile("/nonexistent/config.txt").ok());
}

TEST(ConfigTest, TextRoundTrip) {
  ExperimentConfig c = SmallConfig();
  c.selection = "exp";
  c.control = true;
  c.alpha = 0.25;
  auto back = ParseConfigText(ConfigToText(c));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(ConfigToText(*back), ConfigToText(c));
}

TEST(ConfigTest, ValidationNamesValidChoices) {
  ExperimentConfig c = SmallConfig();
  c.selection = "magic";
  auto t = ToTrainingConfig(c);
  ASSERT_FALSE(t.ok());
  EXPECT_THAT(t.status().message(), HasSubstr("magic"));
  EXPECT_THAT(t.status().message(), HasSubstr("ps"));

  c = SmallConfig();
  c.perturbation = "laplace";
  t = ToTrainingConfig(c);
  ASSERT_FALSE(t.ok());
  EXPECT_THAT(t.status().message(), HasSubstr("pm"));

  c = SmallConfig();
  c.solution = "bogus";
  EXPECT_FALSE(ToTrainingConfig(c).ok());
  c = SmallConfig();
  c.mu = "1.5";
  EXPECT_FALSE(ToTrainingConfig(c).ok());
  c = SmallConfig();
  c.folds = 1;
  EXPECT_FALSE(ToTrainingConfig(c).ok());
  c = SmallConfig();
  c.perturbation = "none";
  EXPECT_FALSE(ToTrainingConfig(c).ok());
  c.solution = "np-k";
  EXPECT_TRUE(ToTrainingConfig(c).ok());
}

TEST(ConfigTest, AutoMuIsPassedThrough) {
  ExperimentConfig c = SmallConfig();
  c.mu = "auto";
  auto t = ToTrainingConfig(c);
  ASSERT_TRUE(t.ok()) << t.status();
  EXPECT_TRUE(t->auto_mu);
}

TEST(VariantLabelTest, Examples) {
  ExperimentConfig c;
  EXPECT_EQ(VariantLabel(c), "fedsel-ps-pm");
  c.control = true;
  EXPECT_EQ(VariantLabel(c), "fedsel-ps-pm-C");
  c.control = false;
  c.solution = "flat";
  EXPECT_EQ(VariantLabel(c), "flat-pm");
  c.solution = "np-k";
  EXPECT_EQ(VariantLabel(c), "np-k");
}

TEST(RunExperimentTest, CsvShapeAndSummary) {
  std::ostringstream csv;
  auto s = RunExperiment(SmallConfig(), &csv);
  ASSERT_TRUE(s.ok()) << s.status();
  EXPECT_EQ(s->runs, 2);
  EXPECT_EQ(s->final_acc_test.size(), 2u);
  EXPECT_THAT(csv.str(), StartsWith(std::string(kMetricsHeader) + "\n"));
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8) << line;
  }
  // eval_every = 1: one row per round for each of the two folds.
  EXPECT_GT(rows, 2);
  EXPECT_GE(s->mean_acc_test, 0.0);
  EXPECT_LE(s->mean_acc_test, 1.0);
}

TEST(RunExperimentTest, ByteIdenticalAcrossThreadCounts) {
  ExperimentConfig c = SmallConfig();
  c.selection = "pe";
  c.epochs = 2;
  std::string reference;
  std::string reference_summary;
  for (int threads : {1, 2, 4}) {
    c.threads = threads;
    std::ostringstream csv;
    std::ostringstream summary;
    auto s = RunExperiment(c, &csv);
    ASSERT_TRUE(s.ok());
    WriteSummary(*s, summary);
    if (reference.empty()) {
      reference = csv.str();
      reference_summary = summary.str();
    } else {
      EXPECT_EQ(csv.str(), reference) << "threads=" << threads;
      EXPECT_EQ(summary.str(), reference_summary);
    }
  }
}

TEST(RunExperimentTest, SummaryRecomputedFromCsv) {
  ExperimentConfig c = SmallConfig();
  c.repeats = 2;
  std::ostringstream csv;
  auto s = RunExperiment(c, &csv);
  ASSERT_TRUE(s.ok());
  auto again = SummaryFromCsv(csv.str());
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(again->runs, 4);
  EXPECT_NEAR(again->mean_acc_test, s->mean_acc_test, 1e-9);
  EXPECT_NEAR(again->std_acc_test, s->std_acc_test, 1e-9);
  EXPECT_FALSE(SummaryFromCsv("").ok());
  EXPECT_FALSE(SummaryFromCsv("a,b\n1,2\n").ok());
}

TEST(RunExperimentTest, BadDatasetFails) {
  ExperimentConfig c = SmallConfig();
  c.dataset = "/nonexistent/file.svm";
  EXPECT_FALSE(RunExperiment(c, nullptr).ok());
}

TEST(CompareTest, IdenticalConfigsHaveZeroGain) {
  const std::vector<ExperimentConfig> configs = {SmallConfig(), SmallConfig()};
  auto rows = Compare(configs);
  ASSERT_TRUE(rows.ok()) << rows.status();
  ASSERT_EQ(rows->size(), 2u);
  EXPECT_EQ((*rows)[0].gain, 0.0);
  EXPECT_EQ((*rows)[1].gain, 0.0);
  std::ostringstream os;
  PrintComparison(*rows, os);
  EXPECT_THAT(os.str(), HasSubstr("fedsel-ps-pm"));
}

TEST(CompareTest, MismatchedSplitsRejected) {
  ExperimentConfig other = SmallConfig();
  other.seed = 99;
  EXPECT_FALSE(Compare({SmallConfig(), other}).ok());
  other = SmallConfig();
  other.dataset = "syn:10,300,0.2,0.95";
  EXPECT_FALSE(Compare({SmallConfig(), other}).ok());
}

TEST(GainLossTest, DefinitionsHold) {
  auto rows = GainLossTable(SmallConfig(), {"ps", "exp"});
  ASSERT_TRUE(rows.ok()) << rows.status();
  ASSERT_EQ(rows->size(), 2u);
  for (const GainLossRow& r : *rows) {
    EXPECT_NEAR(r.gain, 100 * (r.acc_control - r.acc_flat), 1e-9);
    EXPECT_NEAR(r.loss, 100 * (r.acc_control - r.acc_fedsel), 1e-9);
  }
  EXPECT_EQ((*rows)[0].acc_flat, (*rows)[1].acc_flat);
  EXPECT_FALSE(GainLossTable(SmallConfig(), {"nope"}).ok());
}

TEST(AuditFaultTest, Parses) {
  EXPECT_EQ(*ParseAuditFault(""), AuditFault::kNone);
  EXPECT_EQ(*ParseAuditFault("pe-flip"), AuditFault::kPeFlip);
  EXPECT_EQ(*ParseAuditFault("pe-unsplit"), AuditFault::kPeUnsplit);
  EXPECT_EQ(*ParseAuditFault("double-charge"), AuditFault::kDoubleCharge);
  auto bad = ParseAuditFault("gremlin");
  ASSERT_FALSE(bad.ok());
  EXPECT_THAT(bad.status().message(), HasSubstr("double-charge"));
}

AuditOptions QuickAudit(AuditFault fault) {
  AuditOptions o;
  o.grid.dims = {2, 3, 4};
  o.grid.epsilons = {0.5, 2.0};
  o.value_epsilons = {1.0};
  o.fault = fault;
  return o;
}

TEST(RunAuditTest, PassesWithoutFault) {
  std::ostringstream os;
  EXPECT_TRUE(RunAudit(QuickAudit(AuditFault::kNone), os)) << os.str();
  EXPECT_THAT(os.str(), HasSubstr("AUDIT PASS"));
}

TEST(RunAuditTest, EveryFaultIsCaught) {
  for (AuditFault f : {AuditFault::kPeFlip, AuditFault::kPeUnsplit,
                       AuditFault::kDoubleCharge}) {
    std::ostringstream os;
    EXPECT_FALSE(RunAudit(QuickAudit(f), os)) << static_cast<int>(f);
    EXPECT_THAT(os.str(), HasSubstr("AUDIT FAIL"));
  }
}

}  // namespace
}  // namespace fedsel
