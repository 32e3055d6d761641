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

#ifndef FEDSEL_SERVER_H_
#define FEDSEL_SERVER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "fedsel/baselines.h"
#include "fedsel/client.h"
#include "fedsel/dataset.h"
#include "fedsel/models.h"
#include "fedsel/perturbation.h"
#include "fedsel/privacy_budget.h"
#include "fedsel/selection.h"

namespace fedsel {

struct TrainingConfig {
  Solution solution = Solution::kFedSel;
  ModelKind model = ModelKind::kLogistic;
  SelectionMechanism selection = SelectionMechanism::kPs;
  PerturbationBackend perturbation = PerturbationBackend::kPiecewise;

  double epsilon = 2.0;
  int epochs = 1;
  double mu = 0.1;
  bool auto_mu = false;     // pick mu with HyperParametersFree
  double theta = 0.2;       // cap on the automatic mu
  double auto_mu_constant = 1.0;
  // Control variant: selection gets mu * eps' on top of a full eps' for the
  // value stage. Spends more than epsilon; used for gain/loss tables only.
  bool control = false;

  double k_fraction = 0.1;  // k = ceil(k_fraction * d), at least 1
  double eta = 0.9;
  double alpha = 1.0;
  double lambda = 1e-4;
  double batch_fraction = 0.01;  // m = round(batch_fraction * N)
  int batch_size = 0;            // overrides batch_fraction when > 0
  double compression_ratio = 0.1;
  int np_top_k = 1;

  // Metrics every `eval_every` iterations and always after the last one.
  // 0 means only after the last iteration.
  int eval_every = 1;
  bool eval_train = true;
  bool record_wall_time = false;
  int threads = 1;  // <= 1 runs the serial kernels
  std::uint64_t seed = 1;
};

struct RoundMetrics {
  int t = 0;
  int epoch = 0;
  double acc_train = 0.0;
  double acc_test = 0.0;
  double misclass = 0.0;
  int bot_count = 0;
  double wall_ms = 0.0;
};

struct TrainingResult {
  ModelState model;
  std::vector<RoundMetrics> metrics;
  BudgetLedger ledger;
  PrivacyBudget budget;  // what each client was charged per epoch
  int batch_size = 0;
  int k = 0;
  std::vector<std::size_t> participants;  // dataset rows that trained
};

// Mean of the sparse updates as a dense vector of length d. Empty-sample
// outcomes contribute zeros. Each value is multiplied by `scale` (d for the
// flat solution, q for the compressed one) before averaging over m.
absl::StatusOr<std::vector<double>> Aggregate(
    std::span<const SparseUpdate> updates, int d, int m, double scale = 1.0);

// w <- w - alpha * s_tilde.
void GlobalStep(ModelState& model, std::span<const double> s_tilde);

// Budget fraction for selection: reserve c * sqrt(d ln d / m) for the value
// stage, give the rest to selection, capped at theta.
double HyperParametersFree(int m, double epsilon_round, int d, double theta,
                           double c = 1.0);

// Number of Top-k dimensions for dimension d.
int TopKForDimension(double k_fraction, int d);

// Runs federated SGD over the clients in `train` (dataset rows), reporting
// accuracy on `train` and `test`.
absl::StatusOr<TrainingResult> Train(const TrainingConfig& config,
                                     const Dataset& data,
                                     std::span<const std::size_t> train,
                                     std::span<const std::size_t> test);

// Whole dataset as clients; test accuracy on the same rows.
absl::StatusOr<TrainingResult> Train(const TrainingConfig& config,
                                     const Dataset& data);

}  // namespace fedsel

#endif  // FEDSEL_SERVER_H_
