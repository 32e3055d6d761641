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

#include "fedsel/server.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedsel/kernels.h"
#include "fedsel/rng.h"

namespace fedsel {

absl::StatusOr<std::vector<double>> Aggregate(
    std::span<const SparseUpdate> updates, int d, int m, double scale) {
  if (m < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch size must be >= 1, got ", m));
  }
  std::vector<double> sum(d, 0.0);
  for (const SparseUpdate& u : updates) {
    if (u.is_bottom() || !u.value.has_value()) continue;
    const int j = *u.index;
    if (j < 0 || j >= d) {
      return absl::OutOfRangeError(absl::StrCat(
          "update coordinate ", j, " outside [0, ", d, ")"));
    }
    sum[j] += scale * u.value->value;
  }
  for (double& v : sum) v /= m;
  return sum;
}

void GlobalStep(ModelState& model, std::span<const double> s_tilde) {
  for (std::size_t j = 0; j < model.w.size(); ++j) {
    model.w[j] -= model.alpha * s_tilde[j];
  }
}

double HyperParametersFree(int m, double epsilon_round, int d, double theta,
                           double c) {
  if (m < 1 || d < 1 || !(epsilon_round > 0.0)) return 0.0;
  const double required =
      c * std::sqrt(d * std::log(static_cast<double>(d)) / m);
  const double mu = (epsilon_round - required) / epsilon_round;
  return std::clamp(mu, 0.0, std::max(theta, 0.0));
}

int TopKForDimension(double k_fraction, int d) {
  const int k = static_cast<int>(std::ceil(k_fraction * d - 1e-9));
  return std::clamp(k, 1, std::max(d, 1));
}

namespace {

absl::Status Validate(const TrainingConfig& c, const Dataset& data,
                      std::span<const std::size_t> train) {
  if (data.empty() || train.empty()) {
    return absl::InvalidArgumentError("training set is empty");
  }
  for (std::size_t row : train) {
    if (row >= data.size()) {
      return absl::OutOfRangeError(
          absl::StrCat("training row ", row, " outside dataset"));
    }
  }
  if (c.epochs < 1) return absl::InvalidArgumentError("epochs must be >= 1");
  if (!(c.alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (!(c.lambda >= 0.0)) {
    return absl::InvalidArgumentError("lambda must be >= 0");
  }
  if (c.batch_size <= 0 && !(c.batch_fraction > 0.0)) {
    return absl::InvalidArgumentError("batch fraction must be > 0");
  }
  if (!(c.k_fraction > 0.0 && c.k_fraction <= 1.0)) {
    return absl::InvalidArgumentError("k fraction must lie in (0, 1]");
  }
  if (c.solution == Solution::kCompressed &&
      !(c.compression_ratio > 0.0 && c.compression_ratio <= 1.0)) {
    return absl::InvalidArgumentError("compression ratio must lie in (0, 1]");
  }
  if (c.eval_every < 0) {
    return absl::InvalidArgumentError("eval_every must be >= 0");
  }
  if (IsPrivate(c.solution) && c.perturbation == PerturbationBackend::kNone) {
    return absl::InvalidArgumentError(
        "perturbation 'none' is only valid for non-private solutions");
  }
  return absl::OkStatus();
}

// Fisher-Yates with the library's own index sampler.
void Shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformIndex(rng, i)]);
  }
}

double AccuracyOf(const ModelState& model, const Dataset& data,
                  std::span<const std::size_t> rows, int threads) {
  if (rows.empty()) return 0.0;
  const std::size_t correct =
      threads > 1 ? CountCorrectParallel(model.w, data, rows, threads)
                  : CountCorrectSerial(model.w, data, rows);
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

}  // namespace

absl::StatusOr<TrainingResult> Train(const TrainingConfig& config,
                                     const Dataset& data,
                                     std::span<const std::size_t> train,
                                     std::span<const std::size_t> test) {
  if (absl::Status s = Validate(config, data, train); !s.ok()) return s;
  const int d = data.d();
  const auto n = static_cast<int>(train.size());
  const int m =
      config.batch_size > 0
          ? std::min(config.batch_size, n)
          : std::clamp(static_cast<int>(std::lround(config.batch_fraction * n)),
                       1, n);

  TrainingResult result;
  result.batch_size = m;
  result.k = TopKForDimension(config.k_fraction, d);
  result.model.w.assign(d, 0.0);
  result.model.alpha = config.alpha;
  result.model.lambda = config.lambda;
  result.participants.assign(train.begin(), train.end());

  // Budget and per-client charges.
  std::vector<double> charges;
  std::optional<ClientConfig> client_cfg;
  std::unique_ptr<ValuePerturber> baseline_perturber;
  std::optional<ProjectionMatrix> projection;
  int update_dim = d;
  double scale = 1.0;

  if (config.solution == Solution::kFedSel) {
    double mu = config.mu;
    if (config.auto_mu) {
      mu = HyperParametersFree(m, config.epsilon / config.epochs, d,
                               config.theta, config.auto_mu_constant);
    }
    absl::StatusOr<PrivacyBudget> budget =
        AllocateBudget(config.epsilon, config.epochs, mu);
    if (!budget.ok()) return budget.status();
    if (config.control) {
      budget->epsilon_value = budget->epsilon_round;
      budget->epsilon_round += budget->epsilon_select;
    }
    if (config.selection == SelectionMechanism::kPs && result.k >= d) {
      result.k = d - 1;
    }
    absl::StatusOr<ClientConfig> cfg =
        MakeClientConfig(config.model, config.eta, result.k, d, *budget,
                         config.selection, config.perturbation);
    if (!cfg.ok()) return cfg.status();
    client_cfg = *std::move(cfg);
    result.budget = *budget;
    charges = {budget->epsilon_select, budget->epsilon_value};
  } else if (IsPrivate(config.solution)) {
    absl::StatusOr<PrivacyBudget> budget =
        AllocateBudget(config.epsilon, config.epochs, 0.0);
    if (!budget.ok()) return budget.status();
    auto perturber =
        MakePerturber(config.perturbation, budget->epsilon_round);
    if (!perturber.ok()) return perturber.status();
    baseline_perturber = *std::move(perturber);
    result.budget = *budget;
    charges = {budget->epsilon_round};
    if (config.solution == Solution::kFlat) {
      scale = d;
    } else {
      const int q = std::clamp(
          static_cast<int>(std::lround(config.compression_ratio * d)), 1, d);
      projection = ProjectionMatrix::Gaussian(d, q, config.seed);
      update_dim = q;
      scale = q;
    }
  }

  std::vector<ResidualState> residuals;
  if (config.solution == Solution::kFedSel) {
    residuals.assign(train.size(), ResidualState(d));
  }

  BatchContext ctx;
  ctx.data = &data;
  ctx.model = &result.model;
  ctx.solution = config.solution;
  ctx.model_kind = config.model;
  ctx.client = client_cfg ? &*client_cfg : nullptr;
  ctx.perturber = baseline_perturber.get();
  ctx.projection = projection ? &*projection : nullptr;
  ctx.top_k = config.np_top_k;
  ctx.seed = config.seed;
  ctx.charges = charges;
  ctx.ledger = charges.empty() ? nullptr : &result.ledger;

  const int batches_per_epoch = (n + m - 1) / m;
  const int total_rounds = batches_per_epoch * config.epochs;
  std::vector<std::size_t> order(train.size());
  std::vector<ClientOutput> outputs;
  std::vector<SparseUpdate> sparse;
  int t = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng perm_rng = MakeRng(config.seed, Stream::kBatchPermutation,
                           {static_cast<std::uint64_t>(epoch)});
    Shuffle(order, perm_rng);
    ctx.epoch = epoch;

    for (int b = 0; b < batches_per_epoch; ++b) {
      const auto start = std::chrono::steady_clock::now();
      const int begin = b * m;
      const int end = std::min(begin + m, n);
      const int batch = end - begin;
      std::vector<std::size_t> clients(batch);
      std::vector<ResidualState*> batch_residuals;
      for (int i = 0; i < batch; ++i) {
        clients[i] = train[order[begin + i]];
        if (!residuals.empty()) {
          batch_residuals.push_back(&residuals[order[begin + i]]);
        }
      }

      absl::Status status =
          config.threads > 1
              ? RunBatchParallel(ctx, clients, batch_residuals, outputs,
                                 config.threads)
              : RunBatchSerial(ctx, clients, batch_residuals, outputs);
      if (!status.ok()) return status;

      std::vector<double> s_tilde;
      int bottoms = 0;
      if (IsPrivate(config.solution)) {
        sparse.clear();
        for (ClientOutput& o : outputs) {
          if (o.sparse.is_bottom()) ++bottoms;
          sparse.push_back(std::move(o.sparse));
        }
        absl::StatusOr<std::vector<double>> agg =
            Aggregate(sparse, update_dim, batch, scale);
        if (!agg.ok()) return agg.status();
        s_tilde = projection ? projection->Recover(*agg) : *std::move(agg);
      } else {
        s_tilde.assign(d, 0.0);
        for (const ClientOutput& o : outputs) {
          for (int j = 0; j < d; ++j) s_tilde[j] += o.dense[j];
        }
        for (double& v : s_tilde) v /= batch;
      }
      GlobalStep(result.model, s_tilde);
      ++t;

      const bool last = t == total_rounds;
      const bool due = config.eval_every > 0 && t % config.eval_every == 0;
      if (last || due) {
        RoundMetrics rm;
        rm.t = t;
        rm.epoch = epoch;
        rm.acc_test = AccuracyOf(result.model, data, test, config.threads);
        rm.acc_train = config.eval_train ? AccuracyOf(result.model, data,
                                                      train, config.threads)
                                         : 0.0;
        rm.misclass = 1.0 - rm.acc_test;
        rm.bot_count = bottoms;
        if (config.record_wall_time) {
          rm.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        }
        result.metrics.push_back(rm);
      }
    }
  }
  return result;
}

absl::StatusOr<TrainingResult> Train(const TrainingConfig& config,
                                     const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return Train(config, data, all, all);
}

}  // namespace fedsel
