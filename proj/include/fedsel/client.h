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

#ifndef FEDSEL_CLIENT_H_
#define FEDSEL_CLIENT_H_

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fedsel/dataset.h"
#include "fedsel/models.h"
#include "fedsel/perturbation.h"
#include "fedsel/privacy_budget.h"
#include "fedsel/rng.h"
#include "fedsel/selection.h"

namespace fedsel {

// Per-client store of delayed gradients.
struct ResidualState {
  ResidualState() = default;
  explicit ResidualState(int d) : r(d, 0.0), r_prev(d, 0.0) {}

  std::vector<double> r;       // accumulated residual after this round
  std::vector<double> r_prev;  // residual as it was before this round's add
};

// One client's transmission. `index` empty means the empty-sample outcome,
// which the server treats as a zero vector.
struct SparseUpdate {
  SelectionOutcome index;
  std::optional<PerturbedValue> value;

  bool is_bottom() const { return !index.has_value(); }
};

struct ClientConfig {
  ModelKind model = ModelKind::kLogistic;
  double eta = 0.0;  // momentum discount on the previous residual
  int k = 1;
  PrivacyBudget budget;
  SelectionMechanism selection = SelectionMechanism::kPs;
  // Built for budget.epsilon_value; shared read-only across clients.
  std::shared_ptr<const ValuePerturber> perturber;
};

// Validates the arguments and builds the value perturber for the value-stage
// budget.
absl::StatusOr<ClientConfig> MakeClientConfig(ModelKind model, double eta,
                                              int k, int d,
                                              const PrivacyBudget& budget,
                                              SelectionMechanism selection,
                                              PerturbationBackend backend);

// r <- r + g, snapshotting the old r into r_prev.
absl::Status Accumulate(ResidualState& state, std::span<const double> g);

// The client pipeline after the gradient is known:
// accumulate, select j with epsilon1, s_j = r_j + eta * r_prev_j, clip,
// perturb with epsilon2, r_j <- 0. On the empty-sample outcome the residual
// is kept and the update carries no value.
absl::StatusOr<SparseUpdate> PrivatizeGradient(std::span<const double> g,
                                               ResidualState& state,
                                               const ClientConfig& cfg,
                                               Rng& rng);

// Computes the gradient of the configured model at `w` on `ex`, then runs
// PrivatizeGradient.
absl::StatusOr<SparseUpdate> LocalUpdate(const ModelState& w,
                                         const LabeledExample& ex,
                                         ResidualState& state,
                                         const ClientConfig& cfg, Rng& rng);

}  // namespace fedsel

#endif  // FEDSEL_CLIENT_H_
