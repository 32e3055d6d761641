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

#include "fedsel/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <Eigen/Dense>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fedsel {

absl::StatusOr<Solution> ParseSolution(absl::string_view name) {
  if (name == "fedsel") return Solution::kFedSel;
  if (name == "flat") return Solution::kFlat;
  if (name == "compressed") return Solution::kCompressed;
  if (name == "np") return Solution::kNp;
  if (name == "np-rs") return Solution::kNpRs;
  if (name == "np-k") return Solution::kNpK;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown solution '", name,
      "'; valid: fedsel, flat, compressed, np, np-rs, np-k"));
}

absl::string_view SolutionName(Solution solution) {
  switch (solution) {
    case Solution::kFedSel:
      return "fedsel";
    case Solution::kFlat:
      return "flat";
    case Solution::kCompressed:
      return "compressed";
    case Solution::kNp:
      return "np";
    case Solution::kNpRs:
      return "np-rs";
    case Solution::kNpK:
      return "np-k";
  }
  return "?";
}

bool IsPrivate(Solution solution) {
  return solution == Solution::kFedSel || solution == Solution::kFlat ||
         solution == Solution::kCompressed;
}

ProjectionMatrix::ProjectionMatrix(int d, int q, std::vector<double> phi)
    : d_(d), q_(q), phi_(std::move(phi)) {
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> phi_map(phi_.data(), d_, q_);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(phi_map);
  cod.setThreshold(kRankTolerance);
  RowMajor pinv = cod.pseudoInverse();
  pinv_.assign(pinv.data(), pinv.data() + pinv.size());
}

ProjectionMatrix ProjectionMatrix::Gaussian(int d, int q, std::uint64_t seed) {
  Rng rng = MakeRng(seed, Stream::kProjection,
                    {static_cast<std::uint64_t>(d),
                     static_cast<std::uint64_t>(q)});
  const double stddev = 1.0 / std::sqrt(static_cast<double>(q));
  std::vector<double> phi(static_cast<std::size_t>(d) * q);
  for (double& v : phi) v = stddev * StandardNormal(rng);
  return ProjectionMatrix(d, q, std::move(phi));
}

ProjectionMatrix ProjectionMatrix::Identity(int d) {
  std::vector<double> phi(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) phi[i * d + i] = 1.0;
  return ProjectionMatrix(d, d, std::move(phi));
}

std::vector<double> ProjectionMatrix::Project(
    std::span<const double> g) const {
  std::vector<double> y(q_, 0.0);
  for (int row = 0; row < d_; ++row) {
    const double gi = g[row];
    if (gi == 0.0) continue;
    const double* phi_row = &phi_[static_cast<std::size_t>(row) * q_];
    for (int col = 0; col < q_; ++col) y[col] += phi_row[col] * gi;
  }
  return y;
}

std::vector<double> ProjectionMatrix::Recover(
    std::span<const double> y) const {
  std::vector<double> g(d_, 0.0);
  for (int row = 0; row < q_; ++row) {
    const double yi = y[row];
    if (yi == 0.0) continue;
    const double* pinv_row = &pinv_[static_cast<std::size_t>(row) * d_];
    for (int col = 0; col < d_; ++col) g[col] += pinv_row[col] * yi;
  }
  return g;
}

SparseUpdate FlatUpdate(std::span<const double> g,
                        const ValuePerturber& perturber, Rng& rng) {
  const auto j = static_cast<int>(UniformIndex(rng, g.size()));
  SparseUpdate update;
  update.index = j;
  update.value = perturber.Perturb(Clip(g[j]), rng);
  return update;
}

SparseUpdate CompressedUpdate(std::span<const double> g,
                              const ProjectionMatrix& proj,
                              const ValuePerturber& perturber, Rng& rng) {
  const std::vector<double> y = proj.Project(g);
  const auto j = static_cast<int>(UniformIndex(rng, y.size()));
  SparseUpdate update;
  update.index = j;
  update.value = perturber.Perturb(Clip(y[j]), rng);
  return update;
}

std::vector<double> NonPrivateUpdate(std::span<const double> g,
                                     NonPrivateMode mode, int k, Rng& rng) {
  const std::size_t d = g.size();
  std::vector<double> out(d, 0.0);
  switch (mode) {
    case NonPrivateMode::kFull:
      out.assign(g.begin(), g.end());
      break;
    case NonPrivateMode::kRandom: {
      const std::size_t j = UniformIndex(rng, d);
      out[j] = static_cast<double>(d) * g[j];
      break;
    }
    case NonPrivateMode::kTopK: {
      const std::size_t keep =
          std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, d);
      std::vector<std::size_t> order(d);
      std::iota(order.begin(), order.end(), std::size_t{0});
      // Largest |g| first; ties go to the higher index, matching RankAbs.
      std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                        [&](std::size_t a, std::size_t b) {
                          const double fa = std::fabs(g[a]);
                          const double fb = std::fabs(g[b]);
                          return fa > fb || (fa == fb && a > b);
                        });
      for (std::size_t i = 0; i < keep; ++i) out[order[i]] = g[order[i]];
      break;
    }
  }
  return out;
}

}  // namespace fedsel
