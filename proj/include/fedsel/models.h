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

#ifndef FEDSEL_MODELS_H_
#define FEDSEL_MODELS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedsel/dataset.h"

namespace fedsel {

enum class ModelKind { kLogistic, kSvm };

absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name);
absl::string_view ModelKindName(ModelKind kind);

struct ModelState {
  std::vector<double> w;
  double alpha = 0.1;      // learning rate
  double lambda = 1e-4;    // L2 coefficient
};

double Dot(std::span<const double> a, std::span<const double> b);

// L2-regularized logistic loss log(1 + exp(-y w.x)) + lambda/2 |w|^2 and its
// gradient -y x sigma(-y w.x) + lambda w.
double LogisticLoss(const ModelState& m, const LabeledExample& ex);
void LogisticGradient(const ModelState& m, const LabeledExample& ex,
                      std::span<double> out);

// L2-regularized hinge loss max(0, 1 - y w.x) + lambda/2 |w|^2 and its
// subgradient (-y x when the hinge is active, plus lambda w).
double HingeLoss(const ModelState& m, const LabeledExample& ex);
void HingeGradient(const ModelState& m, const LabeledExample& ex,
                   std::span<double> out);

double Loss(ModelKind kind, const ModelState& m, const LabeledExample& ex);
void Gradient(ModelKind kind, const ModelState& m, const LabeledExample& ex,
              std::span<double> out);
std::vector<double> Gradient(ModelKind kind, const ModelState& m,
                             const LabeledExample& ex);

// sign(w.x) with sign(0) = +1.
int Predict(std::span<const double> w, std::span<const double> x);

// Fraction of `indices` classified correctly. Empty index set gives 0.
double Accuracy(const ModelState& m, const Dataset& ds,
                std::span<const std::size_t> indices);
double Accuracy(const ModelState& m, const Dataset& ds);

}  // namespace fedsel

#endif  // FEDSEL_MODELS_H_
