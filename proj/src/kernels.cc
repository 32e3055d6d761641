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

#include "fedsel/kernels.h"

#include <algorithm>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "fedsel/rng.h"

namespace fedsel {
namespace {

absl::Status RunOneClient(const BatchContext& ctx, std::size_t client,
                          ResidualState* residual, ClientOutput& out) {
  Rng rng = MakeRng(ctx.seed, Stream::kClientUpdate,
                    {static_cast<std::uint64_t>(ctx.epoch), client});
  const LabeledExample ex = ctx.data->example(client);
  out = ClientOutput{};
  switch (ctx.solution) {
    case Solution::kFedSel: {
      absl::StatusOr<SparseUpdate> update =
          LocalUpdate(*ctx.model, ex, *residual, *ctx.client, rng);
      if (!update.ok()) return update.status();
      out.sparse = *std::move(update);
      break;
    }
    case Solution::kFlat: {
      const std::vector<double> g = Gradient(ctx.model_kind, *ctx.model, ex);
      out.sparse = FlatUpdate(g, *ctx.perturber, rng);
      break;
    }
    case Solution::kCompressed: {
      const std::vector<double> g = Gradient(ctx.model_kind, *ctx.model, ex);
      out.sparse = CompressedUpdate(g, *ctx.projection, *ctx.perturber, rng);
      break;
    }
    case Solution::kNp:
    case Solution::kNpRs:
    case Solution::kNpK: {
      const std::vector<double> g = Gradient(ctx.model_kind, *ctx.model, ex);
      const NonPrivateMode mode =
          ctx.solution == Solution::kNp
              ? NonPrivateMode::kFull
              : (ctx.solution == Solution::kNpRs ? NonPrivateMode::kRandom
                                                 : NonPrivateMode::kTopK);
      out.dense = NonPrivateUpdate(g, mode, ctx.top_k, rng);
      break;
    }
  }
  if (ctx.ledger != nullptr) {
    for (double amount : ctx.charges) {
      ctx.ledger->RecordSpend(client, ctx.epoch, amount);
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status RunBatchSerial(const BatchContext& ctx,
                            std::span<const std::size_t> clients,
                            std::span<ResidualState*> residuals,
                            std::vector<ClientOutput>& out) {
  out.resize(clients.size());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    ResidualState* residual = residuals.empty() ? nullptr : residuals[i];
    if (absl::Status s = RunOneClient(ctx, clients[i], residual, out[i]);
        !s.ok()) {
      return s;
    }
  }
  return absl::OkStatus();
}

absl::Status RunBatchParallel(const BatchContext& ctx,
                              std::span<const std::size_t> clients,
                              std::span<ResidualState*> residuals,
                              std::vector<ClientOutput>& out, int threads) {
  out.resize(clients.size());
  std::vector<absl::Status> status(clients.size());
  const auto n = static_cast<std::ptrdiff_t>(clients.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(std::max(threads, 1))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    ResidualState* residual = residuals.empty() ? nullptr : residuals[i];
    status[i] = RunOneClient(ctx, clients[i], residual, out[i]);
  }
  for (const absl::Status& s : status) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

std::size_t CountCorrectSerial(std::span<const double> w, const Dataset& ds,
                               std::span<const std::size_t> indices) {
  std::size_t correct = 0;
  for (std::size_t i : indices) {
    if (Predict(w, ds.row(i)) == ds.label(i)) ++correct;
  }
  return correct;
}

std::size_t CountCorrectParallel(std::span<const double> w, const Dataset& ds,
                                 std::span<const std::size_t> indices,
                                 int threads) {
  std::size_t correct = 0;
  const auto n = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for reduction(+ : correct) num_threads(std::max(threads, 1))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t row = indices[i];
    if (Predict(w, ds.row(row)) == ds.label(row)) ++correct;
  }
  return correct;
}

int MaxThreads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fedsel
