// Copyright 2026 The Knapsack-RL Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared vocabulary: task records, status bins, allocation configuration and
// budget plans. Everything here is a plain value type.

#ifndef KNAPSACK_RL_TYPES_H_
#define KNAPSACK_RL_TYPES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace knapsack_rl {

// Aborts with a message when `condition` is false. Used for contract
// violations (caller bugs), never for recoverable input errors.
#define KRL_CHECK(condition, message)                                  \
  do {                                                                 \
    if (!(condition)) ::knapsack_rl::internal::CheckFailed(            \
        __FILE__, __LINE__, #condition, message);                      \
  } while (false)

namespace internal {
[[noreturn]] void CheckFailed(const char* file, int line, const char* expr,
                              std::string_view message);
}  // namespace internal

inline bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

// Five success-rate bins. The order is used as an index everywhere.
enum class StatusCategory {
  kExtremelyHard = 0,  // p == 0
  kHard = 1,           // 0 < p <= 0.2
  kMedium = 2,         // 0.2 < p < 0.8
  kEasy = 3,           // 0.8 <= p < 1
  kExtremelyEasy = 4,  // p == 1
};
inline constexpr int kNumStatusCategories = 5;

using StatusCounts = std::array<int64_t, kNumStatusCategories>;

// Requires 0 <= p <= 1.
StatusCategory CategorizeStatus(double p);
std::string_view StatusCategoryName(StatusCategory category);

// Policy-gradient estimator whose zero-gradient condition drives the value.
enum class Algorithm { kGrpo, kRloo, kReinforce, kRemax };

std::string_view AlgorithmName(Algorithm algorithm);
absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name);

struct EpochCounts {
  int64_t successes = 0;
  int64_t trials = 0;
};

struct TaskRecord {
  std::string task_id;
  // Ground-truth success rate; only the simulator knows it.
  std::optional<double> latent_p;
  // Estimated success rate used for allocation; nullopt means "unknown".
  std::optional<double> est_p;
  std::vector<EpochCounts> epoch_history;
  // Probability of the greedy response, needed by ReMax only.
  std::optional<double> greedy_prob;

  // nullopt while est_p is unknown.
  std::optional<StatusCategory> status() const;
};

absl::Status ValidateTaskRecord(const TaskRecord& task);

struct AllocationConfig {
  int64_t n_total = 2048;
  int64_t n_low = 2;
  int64_t n_up = 128;
  // Confidence for the fallback reservation.
  double alpha = 0.9;
  Algorithm algorithm = Algorithm::kGrpo;
  bool fallback_enabled = true;
};

struct ConfigViolation {
  enum class Constraint {
    kTotalNotPositive,
    kLowBelowOne,
    kUpBelowLow,
    kAlphaOutOfRange,
    kTotalBelowLowerBound,  // n_total < M * n_low
    kTotalAboveUpperBound,  // n_total > M * n_up
  };
  Constraint constraint;
  std::string message;
};

// Returns nullopt when `config` is usable for a batch of `num_tasks` tasks,
// otherwise the first violated constraint.
std::optional<ConfigViolation> ValidateConfig(const AllocationConfig& config,
                                              int64_t num_tasks);

struct Allocation {
  std::string task_id;
  int64_t rollouts = 0;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

// Per-task rollout counts for one iteration. For knapsack plans `total`
// equals the configured budget exactly; baseline policies may leave part of
// the budget unused, in which case `exact_budget` is false and
// `requested_total` keeps the original budget.
struct BudgetPlan {
  std::vector<Allocation> allocations;
  int64_t total = 0;
  int64_t requested_total = 0;
  bool exact_budget = true;

  std::optional<int64_t> RolloutsFor(std::string_view task_id) const;
  std::vector<int64_t> Counts() const;

  friend bool operator==(const BudgetPlan&, const BudgetPlan&) = default;
};

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_TYPES_H_
