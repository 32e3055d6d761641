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

#include "fedsel/perturbation.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fedsel {

absl::StatusOr<PerturbationBackend> ParsePerturbationBackend(
    absl::string_view name) {
  if (name == "duchi") return PerturbationBackend::kDuchi;
  if (name == "pm") return PerturbationBackend::kPiecewise;
  if (name == "hm") return PerturbationBackend::kHybrid;
  if (name == "none") return PerturbationBackend::kNone;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown perturbation backend '", name, "'; valid: duchi, pm, hm"));
}

absl::string_view PerturbationBackendName(PerturbationBackend backend) {
  switch (backend) {
    case PerturbationBackend::kDuchi:
      return "duchi";
    case PerturbationBackend::kPiecewise:
      return "pm";
    case PerturbationBackend::kHybrid:
      return "hm";
    case PerturbationBackend::kNone:
      return "none";
  }
  return "?";
}

absl::StatusOr<std::unique_ptr<ValuePerturber>> MakePerturber(
    PerturbationBackend backend, double epsilon) {
  if (backend == PerturbationBackend::kNone) {
    return std::make_unique<IdentityPerturber>();
  }
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "value perturbation needs a finite epsilon > 0, got ", epsilon));
  }
  switch (backend) {
    case PerturbationBackend::kDuchi:
      return std::make_unique<DuchiPerturber>(epsilon);
    case PerturbationBackend::kPiecewise:
      return std::make_unique<PiecewisePerturber>(epsilon);
    case PerturbationBackend::kHybrid:
      return std::make_unique<HybridPerturber>(epsilon);
    case PerturbationBackend::kNone:
      break;
  }
  return absl::InternalError("unhandled perturbation backend");
}

// ---------------------------------------------------------------------------
// Duchi et al. one-dimensional mechanism.

DuchiPerturber::DuchiPerturber(double epsilon) : ValuePerturber(epsilon) {
  const double e = std::exp(epsilon);
  c_ = (e + 1.0) / (e - 1.0);
  slope_ = (e - 1.0) / (2.0 * e + 2.0);
}

double DuchiPerturber::ProbabilityPositive(double v) const {
  return slope_ * v + 0.5;
}

PerturbedValue DuchiPerturber::Perturb(double v, Rng& rng) const {
  const bool positive = Uniform01(rng) < ProbabilityPositive(v);
  return {positive ? c_ : -c_, c_};
}

std::vector<std::pair<double, double>> DuchiPerturber::Atoms(double v) const {
  const double plus = ProbabilityPositive(v);
  return {{-c_, 1.0 - plus}, {c_, plus}};
}

// ---------------------------------------------------------------------------
// Piecewise mechanism.

PiecewisePerturber::PiecewisePerturber(double epsilon)
    : ValuePerturber(epsilon) {
  t_ = std::exp(epsilon / 2.0);
  c_ = (t_ + 1.0) / (t_ - 1.0);
  high_ = t_ * (t_ - 1.0) / (2.0 * (t_ + 1.0));
  low_ = (t_ - 1.0) / (2.0 * t_ * (t_ + 1.0));
}

double PiecewisePerturber::BandLeft(double v) const {
  return 0.5 * (c_ + 1.0) * v - 0.5 * (c_ - 1.0);
}

double PiecewisePerturber::Density(double v, double x) const {
  if (x < -c_ || x > c_) return 0.0;
  const double left = BandLeft(v);
  const double right = left + c_ - 1.0;
  return (x >= left && x <= right) ? high_ : low_;
}

double PiecewisePerturber::Variance(double v) const {
  return v * v / (t_ - 1.0) + (t_ + 3.0) / (3.0 * (t_ - 1.0) * (t_ - 1.0));
}

PerturbedValue PiecewisePerturber::Perturb(double v, Rng& rng) const {
  // Inverse CDF of: low on [-C, left), high on [left, right], low on (right, C].
  const double left = BandLeft(v);
  const double left_mass = low_ * (left + c_);
  const double band_mass = high_ * (c_ - 1.0);
  const double u = Uniform01(rng);
  double x;
  if (u < left_mass) {
    x = -c_ + u / low_;
  } else if (u < left_mass + band_mass) {
    x = left + (u - left_mass) / high_;
  } else {
    x = left + (c_ - 1.0) + (u - left_mass - band_mass) / low_;
  }
  return {std::clamp(x, -c_, c_), c_};
}

// ---------------------------------------------------------------------------
// Hybrid mechanism.

double HybridMixtureWeight(double epsilon) {
  // Var_mix(v) = a v^2 + b is linear in the weight for every v, and the
  // worst case sits at v^2 = 0 or v^2 = 1. The worst case is therefore
  // piecewise linear and convex in the weight; its minimum is at 0, 1, or
  // where the v^2 coefficient vanishes.
  const DuchiPerturber duchi(epsilon);
  const PiecewisePerturber piecewise(epsilon);
  auto worst = [&](double w) {
    auto var = [&](double v) {
      return w * piecewise.Variance(v) + (1.0 - w) * duchi.Variance(v);
    };
    return std::max(var(0.0), var(1.0));
  };
  const double t = std::exp(epsilon / 2.0);
  const double candidates[] = {0.0, (t - 1.0) / t, 1.0};
  double best = 0.0;
  double best_worst = worst(0.0);
  for (double w : candidates) {
    const double value = worst(w);
    if (value < best_worst - 1e-15 * best_worst) {
      best = w;
      best_worst = value;
    }
  }
  return best;
}

HybridPerturber::HybridPerturber(double epsilon)
    : ValuePerturber(epsilon),
      duchi_(epsilon),
      piecewise_(epsilon),
      weight_(HybridMixtureWeight(epsilon)) {}

PerturbedValue HybridPerturber::Perturb(double v, Rng& rng) const {
  const bool use_piecewise = Uniform01(rng) < weight_;
  PerturbedValue out =
      use_piecewise ? piecewise_.Perturb(v, rng) : duchi_.Perturb(v, rng);
  out.bound = bound();
  return out;
}

std::vector<std::pair<double, double>> HybridPerturber::Atoms(double v) const {
  auto atoms = duchi_.Atoms(v);
  for (auto& [x, p] : atoms) p *= 1.0 - weight_;
  return atoms;
}

double HybridPerturber::Density(double v, double x) const {
  return weight_ * piecewise_.Density(v, x);
}

double HybridPerturber::Variance(double v) const {
  return weight_ * piecewise_.Variance(v) +
         (1.0 - weight_) * duchi_.Variance(v);
}

double HybridPerturber::bound() const {
  return weight_ > 0.0 ? std::max(duchi_.bound(), piecewise_.bound())
                       : duchi_.bound();
}

IdentityPerturber::IdentityPerturber()
    : ValuePerturber(std::numeric_limits<double>::infinity()) {}

}  // namespace fedsel
