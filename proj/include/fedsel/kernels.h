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

#ifndef FEDSEL_KERNELS_H_
#define FEDSEL_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "fedsel/baselines.h"
#include "fedsel/client.h"
#include "fedsel/dataset.h"
#include "fedsel/models.h"
#include "fedsel/privacy_budget.h"

namespace fedsel {

// Read-only inputs shared by every client in one batch.
struct BatchContext {
  const Dataset* data = nullptr;
  const ModelState* model = nullptr;
  Solution solution = Solution::kFedSel;
  ModelKind model_kind = ModelKind::kLogistic;
  const ClientConfig* client = nullptr;        // kFedSel
  const ValuePerturber* perturber = nullptr;   // kFlat, kCompressed
  const ProjectionMatrix* projection = nullptr;  // kCompressed
  int top_k = 1;                               // kNpK
  std::uint64_t seed = 0;
  int epoch = 0;
  // Amounts charged to each participating client, in this order.
  std::vector<double> charges;
  BudgetLedger* ledger = nullptr;
};

// What one client sent. Private solutions fill `sparse`; non-private ones
// fill `dense`.
struct ClientOutput {
  SparseUpdate sparse;
  std::vector<double> dense;
};

// Runs every client in `clients` (dataset row ids) against the same model.
// `residuals[i]` belongs to `clients[i]` and is only touched for kFedSel.
// Client i draws from the stream (seed, kClientUpdate, {epoch, clients[i]}),
// so both kernels produce identical outputs.
absl::Status RunBatchSerial(const BatchContext& ctx,
                            std::span<const std::size_t> clients,
                            std::span<ResidualState*> residuals,
                            std::vector<ClientOutput>& out);
absl::Status RunBatchParallel(const BatchContext& ctx,
                              std::span<const std::size_t> clients,
                              std::span<ResidualState*> residuals,
                              std::vector<ClientOutput>& out, int threads);

// Number of rows in `indices` that `w` classifies correctly.
std::size_t CountCorrectSerial(std::span<const double> w, const Dataset& ds,
                               std::span<const std::size_t> indices);
std::size_t CountCorrectParallel(std::span<const double> w, const Dataset& ds,
                                 std::span<const std::size_t> indices,
                                 int threads);

// Largest usable thread count (1 without OpenMP).
int MaxThreads();

}  // namespace fedsel

#endif  // FEDSEL_KERNELS_H_
