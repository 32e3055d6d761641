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

#ifndef FEDSEL_DATASET_H_
#define FEDSEL_DATASET_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fedsel {

// Non-owning view of one example. Labels are -1 or +1.
struct LabeledExample {
  std::span<const double> x;
  int y = 1;
};

// Dense row-major examples; features in [-1, 1], labels in {-1, +1}.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, int d) : name_(std::move(name)), d_(d) {}

  void Add(std::span<const double> x, int y);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int d() const { return d_; }
  const std::string& name() const { return name_; }

  LabeledExample example(std::size_t i) const {
    return {std::span<const double>(features_).subspan(i * d_, d_),
            labels_[i]};
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * d_, d_);
  }
  int label(std::size_t i) const { return labels_[i]; }

  std::span<const double> features() const { return features_; }
  std::span<const int> labels() const { return labels_; }

 private:
  std::string name_;
  int d_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

}  // namespace fedsel

#endif  // FEDSEL_DATASET_H_
