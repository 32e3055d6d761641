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

#ifndef FEDSEL_PERTURBATION_H_
#define FEDSEL_PERTURBATION_H_

#include <memory>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedsel/rng.h"

namespace fedsel {

// Unbiased epsilon-LDP randomizers for a single value in [-1, 1].
enum class PerturbationBackend {
  kDuchi,      // two-point output {-C, +C}
  kPiecewise,  // three-piece density on [-C, C]
  kHybrid,     // coin-flip mixture of the two above
  kNone,       // identity; non-private baselines only
};

absl::StatusOr<PerturbationBackend> ParsePerturbationBackend(
    absl::string_view name);
absl::string_view PerturbationBackendName(PerturbationBackend backend);

struct PerturbedValue {
  double value = 0.0;
  double bound = 0.0;  // largest |value| the backend can emit
};

// Clamps to [-1, 1].
inline double Clip(double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); }

class ValuePerturber {
 public:
  virtual ~ValuePerturber() = default;

  // `v` must already be clipped to [-1, 1].
  virtual PerturbedValue Perturb(double v, Rng& rng) const = 0;

  // Exact output law for input v: point masses (location, probability) plus
  // a density on the continuous part. Used by the LDP audit.
  virtual std::vector<std::pair<double, double>> Atoms(double v) const = 0;
  virtual double Density(double v, double x) const = 0;

  // Closed-form Var[output | v].
  virtual double Variance(double v) const = 0;

  virtual double bound() const = 0;
  double epsilon() const { return epsilon_; }
  virtual PerturbationBackend backend() const = 0;

 protected:
  explicit ValuePerturber(double epsilon) : epsilon_(epsilon) {}

 private:
  double epsilon_;
};

// Rejects epsilon <= 0 (and non-finite epsilon) for every private backend.
absl::StatusOr<std::unique_ptr<ValuePerturber>> MakePerturber(
    PerturbationBackend backend, double epsilon);

class DuchiPerturber final : public ValuePerturber {
 public:
  explicit DuchiPerturber(double epsilon);

  PerturbedValue Perturb(double v, Rng& rng) const override;
  std::vector<std::pair<double, double>> Atoms(double v) const override;
  double Density(double, double) const override { return 0.0; }
  double Variance(double v) const override { return c_ * c_ - v * v; }
  double bound() const override { return c_; }
  PerturbationBackend backend() const override {
    return PerturbationBackend::kDuchi;
  }

  double ProbabilityPositive(double v) const;

 private:
  double c_;      // (e^eps + 1) / (e^eps - 1)
  double slope_;  // (e^eps - 1) / (2 e^eps + 2)
};

class PiecewisePerturber final : public ValuePerturber {
 public:
  explicit PiecewisePerturber(double epsilon);

  PerturbedValue Perturb(double v, Rng& rng) const override;
  std::vector<std::pair<double, double>> Atoms(double) const override {
    return {};
  }
  double Density(double v, double x) const override;
  double Variance(double v) const override;
  double bound() const override { return c_; }
  PerturbationBackend backend() const override {
    return PerturbationBackend::kPiecewise;
  }

  // High-density band [left, left + C - 1] for input v.
  double BandLeft(double v) const;
  double high_density() const { return high_; }
  double low_density() const { return low_; }

 private:
  double t_;     // e^{eps/2}
  double c_;     // (t + 1) / (t - 1)
  double high_;  // density inside the band
  double low_;   // density outside; high_ / low_ == e^eps
};

// Mixture weight for the piecewise branch that minimizes the worst-case
// (over v in [-1, 1]) variance of the hybrid. Zero below a budget threshold
// where Duchi alone is better.
double HybridMixtureWeight(double epsilon);

class HybridPerturber final : public ValuePerturber {
 public:
  explicit HybridPerturber(double epsilon);

  PerturbedValue Perturb(double v, Rng& rng) const override;
  std::vector<std::pair<double, double>> Atoms(double v) const override;
  double Density(double v, double x) const override;
  double Variance(double v) const override;
  double bound() const override;
  PerturbationBackend backend() const override {
    return PerturbationBackend::kHybrid;
  }

  double piecewise_weight() const { return weight_; }

 private:
  DuchiPerturber duchi_;
  PiecewisePerturber piecewise_;
  double weight_;
};

class IdentityPerturber final : public ValuePerturber {
 public:
  IdentityPerturber();

  PerturbedValue Perturb(double v, Rng&) const override { return {v, 1.0}; }
  std::vector<std::pair<double, double>> Atoms(double v) const override {
    return {{v, 1.0}};
  }
  double Density(double, double) const override { return 0.0; }
  double Variance(double) const override { return 0.0; }
  double bound() const override { return 1.0; }
  PerturbationBackend backend() const override {
    return PerturbationBackend::kNone;
  }
};

}  // namespace fedsel

#endif  // FEDSEL_PERTURBATION_H_
