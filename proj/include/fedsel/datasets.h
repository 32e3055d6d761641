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

#ifndef FEDSEL_DATASETS_H_
#define FEDSEL_DATASETS_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fedsel/dataset.h"

namespace fedsel {

// Linear-classification generator.
//
//   * w* has max(1, floor(c1 * d)) nonzero N(0, 1) coordinates at random
//     positions; the rest are zero.
//   * x ~ Uniform[-1, 1]^d.
//   * y = sign(w*.x) (sign(0) = +1), flipped independently with
//     probability 1 - c2.
struct SyntheticSpec {
  std::size_t n = 10000;
  int d = 100;
  double c1 = 0.01;  // fraction of informative coordinates
  double c2 = 0.9;   // probability a label is kept
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Dataset data;
  std::vector<double> w_star;
  std::vector<std::uint8_t> flipped;  // 1 where the label was flipped
};

absl::StatusOr<SyntheticData> GenerateSynthetic(const SyntheticSpec& spec);

// Parses "d,n,c1,c2[,seed]" (the part after "syn:").
absl::StatusOr<SyntheticSpec> ParseSyntheticSpec(absl::string_view text);

struct LoadOptions {
  int d = 0;  // 0 infers the dimension from the largest index seen
};

// Sparse text: one example per line, "<label> <index>:<value> ...", 1-based
// indices. Labels +1/1 map to +1; 0/-1 map to -1. Blank lines and lines
// starting with '#' are skipped. A column holding any value outside [-1, 1]
// is min-max scaled to [-1, 1]; other columns are kept as they are.
absl::StatusOr<Dataset> LoadSparseText(const std::string& path,
                                       const LoadOptions& options = {});
absl::StatusOr<Dataset> ParseSparseText(absl::string_view text,
                                        const LoadOptions& options = {},
                                        std::string name = "inline");

// Comma-separated file with a header row. The label column is named by
// `label_column` (default: last column). Columns with any non-numeric cell
// are categorical and expand to one {0, 1} column per distinct value
// (sorted). Numeric columns are min-max scaled to [-1, 1]. Numeric labels
// map >0 to +1 and the rest to -1; text labels must take exactly two
// values, the lexicographically larger one mapping to +1.
absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const std::string& label_column = "");
absl::StatusOr<Dataset> ParseCsv(absl::string_view text,
                                 const std::string& label_column = "",
                                 std::string name = "inline");

// "syn:..." generates; a path ending in .csv uses LoadCsv; anything else is
// sparse text.
absl::StatusOr<Dataset> LoadDataset(absl::string_view spec);

absl::Status WriteSparseText(const Dataset& ds, std::ostream& os);

struct FoldSplit {
  int repeat = 0;
  int fold = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// `repeats` independent shuffles, each cut into `folds` contiguous test
// folds. Repeat r shuffles with the stream (seed, kFolds, {r}).
absl::StatusOr<std::vector<FoldSplit>> KFoldSplit(std::size_t n, int folds,
                                                  int repeats,
                                                  std::uint64_t seed);

}  // namespace fedsel

#endif  // FEDSEL_DATASETS_H_
