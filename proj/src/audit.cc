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

#include "fedsel/audit.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedsel/rng.h"

namespace fedsel::audit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tracks max/min of each outcome's probability across status vectors.
class RatioTracker {
 public:
  explicit RatioTracker(std::size_t outcomes)
      : hi_(outcomes, 0.0), lo_(outcomes, kInf) {}

  void Add(std::span<const double> p) {
    for (std::size_t o = 0; o < p.size(); ++o) {
      hi_[o] = std::max(hi_[o], p[o]);
      lo_[o] = std::min(lo_[o], p[o]);
    }
  }

  double MaxRatio() const {
    double worst = 1.0;
    for (std::size_t o = 0; o < hi_.size(); ++o) {
      if (hi_[o] == 0.0) continue;
      worst = std::max(worst, lo_[o] > 0.0 ? hi_[o] / lo_[o] : kInf);
    }
    return worst;
  }

 private:
  std::vector<double> hi_;
  std::vector<double> lo_;
};

std::vector<double> PeDistribution(const SelectionStatus& status,
                                   double keep) {
  const int d = status.d();
  std::vector<double> out(d + 1, 0.0);
  const std::uint32_t patterns = 1u << d;
  for (std::uint32_t mask = 0; mask < patterns; ++mask) {
    double prob = 1.0;
    for (int j = 0; j < d; ++j) {
      const bool bit = (mask >> j) & 1u;
      prob *= (bit == (status.topk[j] != 0)) ? keep : 1.0 - keep;
    }
    const int support = std::popcount(mask);
    if (support == 0) {
      out[d] += prob;
      continue;
    }
    const double share = prob / support;
    for (int j = 0; j < d; ++j) {
      if ((mask >> j) & 1u) out[j] += share;
    }
  }
  return out;
}

std::vector<double> PsDistribution(const SelectionStatus& status,
                                   double top) {
  const int d = status.d();
  const int k = status.k;
  std::vector<double> out(d + 1, 0.0);
  for (int j = 0; j < d; ++j) {
    out[j] = status.topk[j] ? top / k : (1.0 - top) / (d - k);
  }
  return out;
}

}  // namespace

absl::StatusOr<std::vector<double>> ExactDistribution(
    const MechanismModel& model, const SelectionStatus& status, double eps1) {
  const int d = status.d();
  switch (model.mechanism) {
    case SelectionMechanism::kExp: {
      if (d < 2) return absl::InvalidArgumentError("EXP needs d >= 2");
      std::vector<double> out = model.exp_probs(status.ranks, eps1);
      out.push_back(0.0);
      return out;
    }
    case SelectionMechanism::kPe:
      if (d > kMaxEnumerationDim) {
        return absl::InvalidArgumentError(absl::StrCat(
            "PE enumeration limited to d <= ", kMaxEnumerationDim, ", got ",
            d));
      }
      return PeDistribution(status, model.pe_keep(eps1));
    case SelectionMechanism::kPs:
      if (status.k < 1 || status.k >= d) {
        return absl::InvalidArgumentError("PS needs 1 <= k < d");
      }
      return PsDistribution(status, model.ps_top(d, status.k, eps1));
  }
  return absl::InternalError("unhandled mechanism");
}

absl::StatusOr<PeMoments> EnumeratePe(const SelectionStatus& status,
                                      double keep_probability) {
  const int d = status.d();
  if (d > kMaxEnumerationDim) {
    return absl::InvalidArgumentError("d too large for enumeration");
  }
  PeMoments out;
  const std::uint32_t patterns = 1u << d;
  for (std::uint32_t mask = 0; mask < patterns; ++mask) {
    double prob = 1.0;
    for (int j = 0; j < d; ++j) {
      const bool bit = (mask >> j) & 1u;
      prob *= (bit == (status.topk[j] != 0)) ? keep_probability
                                             : 1.0 - keep_probability;
    }
    const int support = std::popcount(mask);
    if (support == 0) out.bottom += prob;
    out.expected_support += prob * support;
  }
  return out;
}

absl::StatusOr<RatioReport> LdpRatioCheck(const MechanismModel& model, int d,
                                          int k, double eps1) {
  if (d < 1 || d > kMaxEnumerationDim) {
    return absl::InvalidArgumentError(absl::StrCat("unsupported d = ", d));
  }
  RatioReport report;
  report.bound = std::exp(eps1);
  RatioTracker tracker(d + 1);

  if (model.mechanism == SelectionMechanism::kExp) {
    if (d > 10) {
      return absl::InvalidArgumentError("EXP permutation audit needs d <= 10");
    }
    std::vector<int> ranks(d);
    std::iota(ranks.begin(), ranks.end(), 1);
    do {
      absl::StatusOr<std::vector<double>> p =
          ExactDistribution(model, StatusFromRanks(ranks, 1), eps1);
      if (!p.ok()) return p.status();
      tracker.Add(*p);
      ++report.status_vectors;
    } while (std::next_permutation(ranks.begin(), ranks.end()));
  } else {
    if (k < 1 || k > d) {
      return absl::InvalidArgumentError(
          absl::StrCat("k = ", k, " outside [1, d = ", d, "]"));
    }
    const std::uint32_t patterns = 1u << d;
    for (std::uint32_t mask = 0; mask < patterns; ++mask) {
      if (std::popcount(mask) != k) continue;
      std::vector<std::uint8_t> topk(d);
      for (int j = 0; j < d; ++j) topk[j] = (mask >> j) & 1u;
      absl::StatusOr<std::vector<double>> p =
          ExactDistribution(model, StatusFromTopk(std::move(topk)), eps1);
      if (!p.ok()) return p.status();
      tracker.Add(*p);
      ++report.status_vectors;
    }
  }
  report.max_ratio = tracker.MaxRatio();
  report.pass = report.max_ratio <= report.bound + kRatioSlack;
  return report;
}

std::vector<GridRow> RunSelectionGrid(std::span<const MechanismModel> models,
                                      const SelectionGrid& grid) {
  struct Point {
    const MechanismModel* model;
    int d;
    int k;
    double eps;
  };
  std::vector<Point> points;
  for (const MechanismModel& model : models) {
    for (int d : grid.dims) {
      for (int k : grid.ks) {
        if (model.mechanism == SelectionMechanism::kExp) {
          if (d < 2 || k != grid.ks.front()) continue;
        } else if (k > d ||
                   (model.mechanism == SelectionMechanism::kPs && k == d)) {
          continue;
        }
        for (double eps : grid.epsilons) points.push_back({&model, d, k, eps});
      }
    }
  }
  std::vector<GridRow> rows(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Point& pt = points[i];
    GridRow& row = rows[i];
    row.mechanism = std::string(SelectionMechanismName(pt.model->mechanism));
    row.d = pt.d;
    row.k = pt.model->mechanism == SelectionMechanism::kExp ? 1 : pt.k;
    row.epsilon = pt.eps;
    absl::StatusOr<RatioReport> r =
        LdpRatioCheck(*pt.model, pt.d, pt.k, pt.eps);
    if (r.ok()) {
      row.max_ratio = r->max_ratio;
      row.bound = r->bound;
      row.pass = r->pass;
    } else {
      row.max_ratio = kInf;
      row.bound = std::exp(pt.eps);
      row.pass = false;
    }
  }
  return rows;
}

double MaxValueRatio(const ValuePerturber& perturber, int input_points,
                     int output_points) {
  std::vector<double> inputs(input_points);
  for (int i = 0; i < input_points; ++i) {
    inputs[i] = input_points == 1 ? 0.0 : -1.0 + 2.0 * i / (input_points - 1);
  }
  double worst = 1.0;

  // Point masses, grouped by location.
  std::map<double, std::vector<double>> atoms;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (const auto& [x, p] : perturber.Atoms(inputs[i])) {
      auto& probs = atoms[x];
      probs.resize(inputs.size(), 0.0);
      probs[i] += p;
    }
  }
  for (auto& [x, probs] : atoms) {
    probs.resize(inputs.size(), 0.0);
    const auto [lo, hi] = std::minmax_element(probs.begin(), probs.end());
    if (*hi == 0.0) continue;
    worst = std::max(worst, *lo > 0.0 ? *hi / *lo : kInf);
  }

  // Continuous part.
  const double c = perturber.bound();
  for (int o = 0; o < output_points; ++o) {
    const double x =
        output_points == 1 ? 0.0 : -c + 2.0 * c * o / (output_points - 1);
    double lo = kInf;
    double hi = 0.0;
    for (double v : inputs) {
      const double f = perturber.Density(v, x);
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    if (hi == 0.0) continue;
    worst = std::max(worst, lo > 0.0 ? hi / lo : kInf);
  }
  return worst;
}

double MeanEstimate::standard_error() const {
  return n > 0 ? stddev / std::sqrt(static_cast<double>(n)) : kInf;
}

MeanEstimate EstimateMean(const ValuePerturber& perturber, double v,
                          std::size_t n, std::uint64_t seed,
                          std::uint64_t stream) {
  Rng rng = MakeRng(seed, Stream::kMonteCarlo, {stream});
  MeanEstimate est;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = perturber.Perturb(v, rng).value;
    est.max_abs = std::max(est.max_abs, std::fabs(x));
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  est.n = n;
  est.mean = mean;
  est.stddev = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  return est;
}

CompositionReport CompositionCheck(const CompositionInput& input) {
  CompositionReport report;
  const PrivacyBudget& b = input.budget;
  report.combined_bound = std::exp(b.epsilon_select + b.epsilon_value);
  auto fail = [&](std::string msg) {
    report.pass = false;
    report.failures.push_back(std::move(msg));
  };
  if (input.ledger == nullptr) {
    fail("no ledger");
    return report;
  }
  if (!BudgetEqual(b.epsilon_select + b.epsilon_value, b.epsilon_round)) {
    fail(absl::StrCat("stage budgets ", b.epsilon_select, " + ",
                      b.epsilon_value, " != per-epoch budget ",
                      b.epsilon_round));
  }
  if (!BudgetEqual(b.epsilon_round * b.epochs, b.epsilon_total)) {
    fail(absl::StrCat("per-epoch budget ", b.epsilon_round, " x ", b.epochs,
                      " epochs != total ", b.epsilon_total));
  }
  const std::vector<ClientId> participants(input.participants.begin(),
                                           input.participants.end());
  std::vector<ClientId> sorted = participants;
  std::sort(sorted.begin(), sorted.end());
  for (const BudgetLedger::Entry& e : input.ledger->Entries()) {
    if (!std::binary_search(sorted.begin(), sorted.end(), e.client)) {
      fail(absl::StrCat("client ", e.client, " charged but not a participant"));
    } else if (e.epoch < 1 || e.epoch > b.epochs) {
      fail(absl::StrCat("client ", e.client, " charged in epoch ", e.epoch));
    }
  }
  for (ClientId client : sorted) {
    for (int epoch = 1; epoch <= b.epochs; ++epoch) {
      const double spent = input.ledger->Spent(client, epoch);
      if (!BudgetEqual(spent, b.epsilon_round)) {
        fail(absl::StrCat("client ", client, " epoch ", epoch, " spent ",
                          spent, ", expected ", b.epsilon_round));
      }
    }
    const double total = input.ledger->TotalSpent(client);
    if (std::fabs(total - b.epsilon_total) > kBudgetTolerance * b.epochs) {
      fail(absl::StrCat("client ", client, " total ", total, ", expected ",
                        b.epsilon_total));
    }
  }
  if (std::log(input.selection_ratio) > b.epsilon_select + kRatioSlack) {
    fail(absl::StrCat("selection ratio ", input.selection_ratio,
                      " exceeds e^", b.epsilon_select));
  }
  if (std::log(input.value_ratio) > b.epsilon_value + kRatioSlack) {
    fail(absl::StrCat("value ratio ", input.value_ratio, " exceeds e^",
                      b.epsilon_value));
  }
  return report;
}

absl::StatusOr<ErrorStats> MeasureAggregationError(int d, int m,
                                                   double epsilon2, int trials,
                                                   PerturbationBackend backend,
                                                   std::uint64_t seed) {
  if (d < 1 || m < 1 || trials < 1) {
    return absl::InvalidArgumentError("need d, m, trials >= 1");
  }
  absl::StatusOr<std::unique_ptr<ValuePerturber>> perturber =
      MakePerturber(backend, epsilon2);
  if (!perturber.ok()) return perturber.status();

  // Fixed true values, one coordinate per client.
  std::vector<double> values(m);
  Rng value_rng = MakeRng(seed, Stream::kMonteCarlo, {0});
  for (double& v : values) v = 2.0 * Uniform01(value_rng) - 1.0;
  std::vector<double> truth(d, 0.0);
  for (int i = 0; i < m; ++i) truth[i % d] += values[i] / m;

  ErrorStats stats;
  stats.samples.resize(trials);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < trials; ++t) {
    Rng rng = MakeRng(seed, Stream::kMonteCarlo,
                      {1, static_cast<std::uint64_t>(t)});
    std::vector<double> estimate(d, 0.0);
    for (int i = 0; i < m; ++i) {
      estimate[i % d] += (*perturber)->Perturb(values[i], rng).value / m;
    }
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
      worst = std::max(worst, std::fabs(estimate[j] - truth[j]));
    }
    stats.samples[t] = worst;
  }
  std::vector<double> sorted = stats.samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  stats.median = sorted.size() % 2 == 1
                     ? sorted[mid]
                     : 0.5 * (sorted[mid - 1] + sorted[mid]);
  stats.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
               static_cast<double>(sorted.size());
  return stats;
}

absl::StatusOr<VarianceComparison> CompareAccumulationVariance(
    double alpha, int m, double s, PerturbationBackend backend,
    double epsilon, int trials, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0) || m < 1 || trials < 2) {
    return absl::InvalidArgumentError(
        "need alpha in (0, 1), m >= 1, trials >= 2");
  }
  absl::StatusOr<std::unique_ptr<ValuePerturber>> perturber =
      MakePerturber(backend, epsilon);
  if (!perturber.ok()) return perturber.status();
  auto variance = [&](double input, double factor, std::uint64_t stream) {
    Rng rng = MakeRng(seed, Stream::kMonteCarlo, {2, stream});
    double mean = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < trials; ++i) {
      const double x = factor * (*perturber)->Perturb(input, rng).value;
      const double delta = x - mean;
      mean += delta / (i + 1);
      m2 += delta * (x - mean);
    }
    return m2 / (trials - 1);
  };
  VarianceComparison out;
  out.adapted = variance(Clip(s), alpha / m, 0);
  out.scaled = variance(Clip(alpha * s), 1.0 / m, 1);
  return out;
}

void PrintGrid(std::span<const GridRow> rows, std::ostream& os) {
  os << std::left << std::setw(6) << "mech" << std::setw(4) << "d"
     << std::setw(4) << "k" << std::setw(8) << "eps1" << std::setw(16)
     << "max_ratio" << std::setw(16) << "e^eps1"
     << "result\n";
  for (const GridRow& r : rows) {
    os << std::left << std::setw(6) << r.mechanism << std::setw(4) << r.d
       << std::setw(4) << r.k << std::setw(8) << r.epsilon << std::setw(16)
       << std::setprecision(12) << r.max_ratio << std::setw(16) << r.bound
       << (r.pass ? "PASS" : "FAIL") << std::setprecision(6) << "\n";
  }
}

}  // namespace fedsel::audit
