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

#ifndef FEDSEL_PRIVACY_BUDGET_H_
#define FEDSEL_PRIVACY_BUDGET_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <ostream>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace fedsel {

// Absolute tolerance for comparing privacy amounts.
inline constexpr double kBudgetTolerance = 1e-12;

inline bool BudgetEqual(double a, double b) {
  return a - b <= kBudgetTolerance && b - a <= kBudgetTolerance;
}

// Per-client privacy budget split across epochs and the two stages.
struct PrivacyBudget {
  double epsilon_total = 0.0;   // ε for the whole run
  int epochs = 1;               // E
  double mu = 0.0;              // fraction of each round spent on selection
  double epsilon_round = 0.0;   // ε' = ε / E
  double epsilon_select = 0.0;  // ε1 = μ ε'
  double epsilon_value = 0.0;   // ε2 = ε' - ε1
};

// Splits `epsilon_total` into per-epoch and per-stage budgets. Fails on
// epochs < 1, mu outside [0, 1], or a negative/non-finite epsilon.
absl::StatusOr<PrivacyBudget> AllocateBudget(double epsilon_total, int epochs,
                                             double mu);

using ClientId = std::uint64_t;

// Records how much budget each client has spent in each epoch.
//
// Safe for concurrent RecordSpend calls from any number of threads. Amounts
// for a single (client, epoch) entry are summed in call order, so a client
// whose spends are issued sequentially gets a reproducible total.
class BudgetLedger {
 public:
  struct Entry {
    ClientId client;
    int epoch;
    double spent;
  };

  BudgetLedger() = default;
  BudgetLedger(const BudgetLedger& other);
  BudgetLedger& operator=(const BudgetLedger& other);

  // `amount` must be >= 0; negative amounts are clamped to zero.
  void RecordSpend(ClientId client, int epoch, double amount);

  // Zero for any client/epoch never charged.
  double Spent(ClientId client, int epoch) const;
  double TotalSpent(ClientId client) const;

  std::vector<Entry> Entries() const;
  std::size_t num_clients() const;

  // Text table with columns client, epoch, spent.
  void Dump(std::ostream& os) const;

 private:
  mutable std::mutex mu_;
  std::map<ClientId, std::map<int, double>> spent_;
};

}  // namespace fedsel

#endif  // FEDSEL_PRIVACY_BUDGET_H_
