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

#ifndef FEDSEL_BASELINES_H_
#define FEDSEL_BASELINES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedsel/client.h"
#include "fedsel/perturbation.h"
#include "fedsel/rng.h"

namespace fedsel {

// Training solutions the server can run. Everything except kFedSel is a
// competitor: flat (random coordinate, rescaled by d), compressed (random
// projection to q dimensions, pseudo-inverse recovery), and three
// non-private transmitters.
enum class Solution { kFedSel, kFlat, kCompressed, kNp, kNpRs, kNpK };

absl::StatusOr<Solution> ParseSolution(absl::string_view name);
absl::string_view SolutionName(Solution solution);
bool IsPrivate(Solution solution);

// Public random matrix Phi (d x q, N(0, 1/q) entries) and its pseudo-inverse.
class ProjectionMatrix {
 public:
  // Rank cutoff used when forming the pseudo-inverse.
  static constexpr double kRankTolerance = 1e-10;

  static ProjectionMatrix Gaussian(int d, int q, std::uint64_t seed);
  // q == d identity; test fixture for exact recovery.
  static ProjectionMatrix Identity(int d);

  int d() const { return d_; }
  int q() const { return q_; }

  // Phi^T g, length q.
  std::vector<double> Project(std::span<const double> g) const;
  // pinv(Phi)^T y, length d.
  std::vector<double> Recover(std::span<const double> y) const;

  double phi(int row, int col) const { return phi_[row * q_ + col]; }

 private:
  ProjectionMatrix(int d, int q, std::vector<double> phi);

  int d_ = 0;
  int q_ = 0;
  std::vector<double> phi_;   // d x q, row-major
  std::vector<double> pinv_;  // q x d, row-major
};

// Flat solution, one coordinate: uniform j, perturb clip(g_j) with the whole
// round budget. The server rescales by d.
SparseUpdate FlatUpdate(std::span<const double> g,
                        const ValuePerturber& perturber, Rng& rng);

// Compressed solution: project, sample one of q coordinates uniformly, clip
// and perturb. The returned index is in q-space; the server rescales by q and
// recovers through the pseudo-inverse.
SparseUpdate CompressedUpdate(std::span<const double> g,
                              const ProjectionMatrix& proj,
                              const ValuePerturber& perturber, Rng& rng);

enum class NonPrivateMode { kFull, kRandom, kTopK };

// Dense d-vector the client would send without privacy:
//   kFull   - g itself
//   kRandom - one uniform coordinate scaled by d
//   kTopK   - the k largest-|g| coordinates, unscaled
std::vector<double> NonPrivateUpdate(std::span<const double> g,
                                     NonPrivateMode mode, int k, Rng& rng);

}  // namespace fedsel

#endif  // FEDSEL_BASELINES_H_
