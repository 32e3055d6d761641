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

#include <utility>

#include "absl/strings/str_cat.h"

namespace fedsel {

absl::StatusOr<ClientConfig> MakeClientConfig(ModelKind model, double eta,
                                              int k, int d,
                                              const PrivacyBudget& budget,
                                              SelectionMechanism selection,
                                              PerturbationBackend backend) {
  if (!(eta >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("eta must be >= 0, got ", eta));
  }
  if (k < 1 || k > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must lie in [1, d] = [1, ", d, "], got ", k));
  }
  if (selection == SelectionMechanism::kPs && k == d) {
    return absl::InvalidArgumentError(
        "PS selection is undefined for k == d (empty non-Top-k pool)");
  }
  if (selection == SelectionMechanism::kExp && d < 2) {
    return absl::InvalidArgumentError("EXP selection needs d >= 2");
  }
  auto perturber = MakePerturber(backend, budget.epsilon_value);
  if (!perturber.ok()) return perturber.status();
  ClientConfig cfg;
  cfg.model = model;
  cfg.eta = eta;
  cfg.k = k;
  cfg.budget = budget;
  cfg.selection = selection;
  cfg.perturber = std::move(*perturber);
  return cfg;
}

absl::Status Accumulate(ResidualState& state, std::span<const double> g) {
  if (g.size() != state.r.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "gradient has ", g.size(), " coordinates, residual has ",
        state.r.size()));
  }
  state.r_prev = state.r;
  for (std::size_t j = 0; j < g.size(); ++j) state.r[j] += g[j];
  return absl::OkStatus();
}

absl::StatusOr<SparseUpdate> PrivatizeGradient(std::span<const double> g,
                                               ResidualState& state,
                                               const ClientConfig& cfg,
                                               Rng& rng) {
  if (absl::Status s = Accumulate(state, g); !s.ok()) return s;
  const SelectionStatus status = RankAbs(state.r, cfg.k);
  absl::StatusOr<SelectionOutcome> outcome =
      Select(cfg.selection, status, cfg.budget.epsilon_select, rng);
  if (!outcome.ok()) return outcome.status();

  SparseUpdate update;
  if (!outcome->has_value()) return update;
  const int j = **outcome;
  const double s = state.r[j] + cfg.eta * state.r_prev[j];
  update.index = j;
  update.value = cfg.perturber->Perturb(Clip(s), rng);
  state.r[j] = 0.0;
  return update;
}

absl::StatusOr<SparseUpdate> LocalUpdate(const ModelState& w,
                                         const LabeledExample& ex,
                                         ResidualState& state,
                                         const ClientConfig& cfg, Rng& rng) {
  if (ex.x.size() != w.w.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "example has ", ex.x.size(), " features, model has ", w.w.size()));
  }
  std::vector<double> g(w.w.size());
  Gradient(cfg.model, w, ex, g);
  return PrivatizeGradient(g, state, cfg, rng);
}

}  // namespace fedsel
