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

#ifndef FEDSEL_AUDIT_H_
#define FEDSEL_AUDIT_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fedsel/perturbation.h"
#include "fedsel/privacy_budget.h"
#include "fedsel/selection.h"

namespace fedsel::audit {

// Slack allowed on top of e^eps in every ratio check.
inline constexpr double kRatioSlack = 1e-9;
// Largest d for which PE flip patterns are enumerated.
inline constexpr int kMaxEnumerationDim = 20;

// The probability laws of a selection mechanism. Defaults are the functions
// the shipped samplers use; replacing one models a miscoded mechanism.
struct MechanismModel {
  SelectionMechanism mechanism = SelectionMechanism::kPs;
  std::function<double(double)> pe_keep = PeKeepProbability;
  std::function<double(int, int, double)> ps_top = PsTopProbability;
  std::function<std::vector<double>(std::span<const int>, double)> exp_probs =
      ExpProbabilities;

  static MechanismModel Shipped(SelectionMechanism mechanism) {
    MechanismModel m;
    m.mechanism = mechanism;
    return m;
  }
};

// Exact output distribution, length d + 1. Entry d is the empty-sample
// outcome (nonzero only for PE). PE is computed by enumerating all 2^d flip
// patterns; EXP and PS use their closed forms.
absl::StatusOr<std::vector<double>> ExactDistribution(
    const MechanismModel& model, const SelectionStatus& status, double eps1);

// PE statistics by enumeration: Pr[empty sample] and E[support size].
struct PeMoments {
  double bottom = 0.0;
  double expected_support = 0.0;
};
absl::StatusOr<PeMoments> EnumeratePe(const SelectionStatus& status,
                                      double keep_probability);

struct RatioReport {
  double max_ratio = 1.0;
  double bound = 1.0;  // e^eps1
  std::size_t status_vectors = 0;
  bool pass = true;
};

// max over outcomes o and admissible status vectors z, z' of
// Pr[o | z] / Pr[o | z']. EXP ranges over every rank permutation of 1..d,
// PE and PS over every binary vector with k ones.
absl::StatusOr<RatioReport> LdpRatioCheck(const MechanismModel& model, int d,
                                          int k, double eps1);

struct GridRow {
  std::string mechanism;
  int d = 0;
  int k = 0;
  double epsilon = 0.0;
  double max_ratio = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SelectionGrid {
  std::vector<int> dims = {2, 3, 4, 5, 6, 7, 8};
  std::vector<int> ks = {1, 2, 3};
  std::vector<double> epsilons = {0.1, 0.5, 1.0, 2.0, 4.0};
};

// Runs LdpRatioCheck over the grid for each mechanism in `models`. Points
// where the mechanism is undefined (k > d, or k == d for PS) are skipped;
// EXP ignores k and is checked once per (d, eps). Grid points run in
// parallel; rows come back in grid order.
std::vector<GridRow> RunSelectionGrid(std::span<const MechanismModel> models,
                                      const SelectionGrid& grid);

// Largest probability (atoms) or density ratio between any two inputs on an
// evenly spaced input grid over [-1, 1], checked at every atom and at
// `output_points` evenly spaced points of [-C, C].
double MaxValueRatio(const ValuePerturber& perturber, int input_points = 21,
                     int output_points = 101);

struct MeanEstimate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation of the outputs
  std::size_t n = 0;
  double max_abs = 0.0;

  double standard_error() const;
};

// Monte-Carlo mean of perturber(v) over n draws from (seed, kMonteCarlo,
// {stream}).
MeanEstimate EstimateMean(const ValuePerturber& perturber, double v,
                          std::size_t n, std::uint64_t seed,
                          std::uint64_t stream = 0);

struct CompositionInput {
  const BudgetLedger* ledger = nullptr;
  PrivacyBudget budget;
  std::span<const ClientId> participants;
  // Measured worst-case ratios of each stage (1.0 when a stage is absent).
  double selection_ratio = 1.0;
  double value_ratio = 1.0;
};

struct CompositionReport {
  bool pass = true;
  double combined_bound = 0.0;  // e^(eps1 + eps2)
  std::vector<std::string> failures;
};

// Checks that every participant spent exactly eps' in each epoch and eps in
// total, that no one else was charged, and that each stage's measured ratio
// stays within its configured budget.
CompositionReport CompositionCheck(const CompositionInput& input);

struct ErrorStats {
  std::vector<double> samples;
  double median = 0.0;
  double mean = 0.0;
};

// m clients each hold a one-coordinate vector (coordinate i mod d, value
// fixed per client). Each trial perturbs every value with epsilon2 and
// records max_j |s_tilde_j - X_j| where X is the unperturbed mean.
absl::StatusOr<ErrorStats> MeasureAggregationError(int d, int m,
                                                   double epsilon2, int trials,
                                                   PerturbationBackend backend,
                                                   std::uint64_t seed);

struct VarianceComparison {
  double adapted = 0.0;  // Var[(alpha/m) * perturb(clip(s))]
  double scaled = 0.0;   // Var[(1/m) * perturb(clip(alpha * s))]
  double ratio() const { return adapted / scaled; }
};

// Variance of one client's contribution to w_j under the two accumulation
// schemes: raw gradients scaled by the learning rate at the server, versus
// learning-rate-scaled gradients.
absl::StatusOr<VarianceComparison> CompareAccumulationVariance(
    double alpha, int m, double s, PerturbationBackend backend,
    double epsilon, int trials, std::uint64_t seed);

void PrintGrid(std::span<const GridRow> rows, std::ostream& os);

}  // namespace fedsel::audit

#endif  // FEDSEL_AUDIT_H_
