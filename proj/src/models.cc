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

#include "fedsel/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fedsel {

void Dataset::Add(std::span<const double> x, int y) {
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(y);
}

absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name) {
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "svm") return ModelKind::kSvm;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown model '", name, "'; valid: logistic, svm"));
}

absl::string_view ModelKindName(ModelKind kind) {
  return kind == ModelKind::kLogistic ? "logistic" : "svm";
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

double HalfSquaredNorm(std::span<const double> w) { return 0.5 * Dot(w, w); }

// log(1 + e^z) without overflow.
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double LogisticLoss(const ModelState& m, const LabeledExample& ex) {
  const double margin = ex.y * Dot(m.w, ex.x);
  return Softplus(-margin) + m.lambda * HalfSquaredNorm(m.w);
}

void LogisticGradient(const ModelState& m, const LabeledExample& ex,
                      std::span<double> out) {
  const double margin = ex.y * Dot(m.w, ex.x);
  const double scale = -ex.y * Sigmoid(-margin);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = scale * ex.x[j] + m.lambda * m.w[j];
  }
}

double HingeLoss(const ModelState& m, const LabeledExample& ex) {
  const double margin = ex.y * Dot(m.w, ex.x);
  return std::max(0.0, 1.0 - margin) + m.lambda * HalfSquaredNorm(m.w);
}

void HingeGradient(const ModelState& m, const LabeledExample& ex,
                   std::span<double> out) {
  const double margin = ex.y * Dot(m.w, ex.x);
  const double scale = 1.0 - margin > 0.0 ? -static_cast<double>(ex.y) : 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = scale * ex.x[j] + m.lambda * m.w[j];
  }
}

double Loss(ModelKind kind, const ModelState& m, const LabeledExample& ex) {
  return kind == ModelKind::kLogistic ? LogisticLoss(m, ex) : HingeLoss(m, ex);
}

void Gradient(ModelKind kind, const ModelState& m, const LabeledExample& ex,
              std::span<double> out) {
  if (kind == ModelKind::kLogistic) {
    LogisticGradient(m, ex, out);
  } else {
    HingeGradient(m, ex, out);
  }
}

std::vector<double> Gradient(ModelKind kind, const ModelState& m,
                             const LabeledExample& ex) {
  std::vector<double> g(m.w.size());
  Gradient(kind, m, ex, g);
  return g;
}

int Predict(std::span<const double> w, std::span<const double> x) {
  return Dot(w, x) >= 0.0 ? 1 : -1;
}

double Accuracy(const ModelState& m, const Dataset& ds,
                std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i : indices) {
    if (Predict(m.w, ds.row(i)) == ds.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

double Accuracy(const ModelState& m, const Dataset& ds) {
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return Accuracy(m, ds, all);
}

}  // namespace fedsel
