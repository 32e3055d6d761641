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

#ifndef FEDSEL_EXPERIMENT_H_
#define FEDSEL_EXPERIMENT_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedsel/audit.h"
#include "fedsel/dataset.h"
#include "fedsel/server.h"

namespace fedsel {

// Everything needed to reproduce one experiment. Text form is one
// `key = value` per line; '#' starts a comment. Keys match the CLI flags.
struct ExperimentConfig {
  std::string name;
  std::string dataset = "syn:100,10000,0.01,0.9";
  std::string solution = "fedsel";
  std::string selection = "ps";
  std::string perturbation = "pm";
  std::string model = "logistic";
  double epsilon = 2.0;
  int epochs = 1;
  std::string mu = "0.1";  // a number in [0, 1] or "auto"
  double theta = 0.2;
  double auto_mu_c = 1.0;
  bool control = false;
  double k_fraction = 0.1;
  double eta = 0.9;
  double alpha = 1.0;
  double lambda = 1e-4;
  double m_fraction = 0.01;
  int batch_size = 0;
  double compression_ratio = 0.1;
  int repeats = 1;
  int folds = 5;
  int eval_every = 0;
  bool eval_train = true;
  bool wall_time = false;
  int threads = 1;
  std::uint64_t seed = 1;
  std::string output;  // metrics CSV path; empty = no file
};

// Sets one key. Unknown keys and unparsable values are errors.
absl::Status SetConfigValue(ExperimentConfig& config, absl::string_view key,
                            absl::string_view value);

absl::StatusOr<ExperimentConfig> ParseConfigText(absl::string_view text);
absl::StatusOr<ExperimentConfig> LoadConfigFile(const std::string& path);
std::string ConfigToText(const ExperimentConfig& config);

// Checks every field against the module preconditions and converts.
absl::StatusOr<TrainingConfig> ToTrainingConfig(const ExperimentConfig& config);

// Label such as "fedsel-ps-pm", "fedsel-ps-pm-C", "flat-pm", "np-k".
std::string VariantLabel(const ExperimentConfig& config);

struct ExperimentSummary {
  std::string label;
  int runs = 0;
  double mean_acc_test = 0.0;
  double std_acc_test = 0.0;
  double mean_acc_train = 0.0;
  double mean_bottoms = 0.0;  // empty-sample outcomes per final round
  std::vector<double> final_acc_test;
};

inline constexpr absl::string_view kMetricsHeader =
    "repeat,fold,t,epoch,acc_train,acc_test,misclass,bot_count,wall_ms";

// Trains on every (repeat, fold) split. Per-round metrics go to `csv` (if
// non-null) under kMetricsHeader.
absl::StatusOr<ExperimentSummary> RunExperiment(const ExperimentConfig& config,
                                                const Dataset& data,
                                                std::ostream* csv);
absl::StatusOr<ExperimentSummary> RunExperiment(const ExperimentConfig& config,
                                                std::ostream* csv);

void WriteSummary(const ExperimentSummary& summary, std::ostream& os);

// Mean/std of the final test accuracy of each split, recomputed from a
// metrics CSV produced by RunExperiment.
absl::StatusOr<ExperimentSummary> SummaryFromCsv(absl::string_view csv);

struct ComparisonRow {
  ExperimentSummary summary;
  double gain = 0.0;  // accuracy minus the first row's, in percentage points
};

// Runs each config (they must share dataset, folds, repeats and seed) and
// reports accuracy differences against the first one.
absl::StatusOr<std::vector<ComparisonRow>> Compare(
    const std::vector<ExperimentConfig>& configs);
void PrintComparison(std::span<const ComparisonRow> rows, std::ostream& os);

// Gain/loss of private selection for each mechanism:
//   gain = acc(X-C) - acc(flat),  loss = acc(X-C) - acc(X)
// where X is fedsel with mechanism X and X-C is its control variant.
struct GainLossRow {
  std::string mechanism;
  double gain = 0.0;
  double loss = 0.0;
  double acc_fedsel = 0.0;
  double acc_control = 0.0;
  double acc_flat = 0.0;
};
absl::StatusOr<std::vector<GainLossRow>> GainLossTable(
    const ExperimentConfig& base, const std::vector<std::string>& mechanisms);
void PrintGainLoss(const ExperimentConfig& base,
                   std::span<const GainLossRow> rows, std::ostream& os);

enum class AuditFault {
  kNone,
  kPeFlip,        // PE keeps bits with e^{2 eps}/(e^{2 eps}+1)
  kPeUnsplit,     // PE spends the whole eps1 on every bit
  kDoubleCharge,  // composition run charges every client twice
};

absl::StatusOr<AuditFault> ParseAuditFault(absl::string_view name);

struct AuditOptions {
  audit::SelectionGrid grid;
  std::vector<double> value_epsilons = {0.5, 1.0, 2.0, 4.0};
  AuditFault fault = AuditFault::kNone;
  std::uint64_t seed = 1;
};

// Selection LDP grid, PE exactness, value-perturbation ratio checks and a
// composition check of a small simulated run. Writes a text report and
// returns whether everything passed.
bool RunAudit(const AuditOptions& options, std::ostream& os);

}  // namespace fedsel

#endif  // FEDSEL_EXPERIMENT_H_
