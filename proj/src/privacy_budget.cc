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

#include "fedsel/privacy_budget.h"

#include <cmath>
#include <iomanip>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fedsel {

absl::StatusOr<PrivacyBudget> AllocateBudget(double epsilon_total, int epochs,
                                             double mu) {
  if (!std::isfinite(epsilon_total) || epsilon_total < 0.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "epsilon must be finite and non-negative, got ", epsilon_total));
  }
  if (epochs < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("epochs must be >= 1, got ", epochs));
  }
  if (!(mu >= 0.0 && mu <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("mu must lie in [0, 1], got ", mu));
  }
  PrivacyBudget b;
  b.epsilon_total = epsilon_total;
  b.epochs = epochs;
  b.mu = mu;
  b.epsilon_round = epsilon_total / epochs;
  b.epsilon_select = mu * b.epsilon_round;
  b.epsilon_value = b.epsilon_round - b.epsilon_select;
  return b;
}

BudgetLedger::BudgetLedger(const BudgetLedger& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  spent_ = other.spent_;
}

BudgetLedger& BudgetLedger::operator=(const BudgetLedger& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  spent_ = other.spent_;
  return *this;
}

void BudgetLedger::RecordSpend(ClientId client, int epoch, double amount) {
  if (!(amount > 0.0)) amount = 0.0;
  std::lock_guard<std::mutex> lock(mu_);
  spent_[client][epoch] += amount;
}

double BudgetLedger::Spent(ClientId client, int epoch) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto c = spent_.find(client);
  if (c == spent_.end()) return 0.0;
  auto e = c->second.find(epoch);
  return e == c->second.end() ? 0.0 : e->second;
}

double BudgetLedger::TotalSpent(ClientId client) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto c = spent_.find(client);
  if (c == spent_.end()) return 0.0;
  double total = 0.0;
  for (const auto& [epoch, amount] : c->second) total += amount;
  return total;
}

std::vector<BudgetLedger::Entry> BudgetLedger::Entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<Entry> out;
  for (const auto& [client, per_epoch] : spent_) {
    for (const auto& [epoch, amount] : per_epoch) {
      out.push_back({client, epoch, amount});
    }
  }
  return out;
}

std::size_t BudgetLedger::num_clients() const {
  std::lock_guard<std::mutex> lock(mu_);
  return spent_.size();
}

void BudgetLedger::Dump(std::ostream& os) const {
  os << std::left << std::setw(10) << "client" << std::setw(8) << "epoch"
     << "spent\n";
  for (const Entry& e : Entries()) {
    os << std::left << std::setw(10) << e.client << std::setw(8) << e.epoch
       << std::setprecision(17) << e.spent << "\n";
  }
}

}  // namespace fedsel
