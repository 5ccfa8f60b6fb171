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

// Exploration-budget allocation as a knapsack problem.
//
// Every (task, rollout count) pair is an item whose weight is the rollout
// count and whose value is TaskValue(n, p_hat). Exactly one item is picked
// per task and the weights must add up to the total budget:
//
//   maximize   sum_i Value(N_i, p_i)
//   subject to sum_i N_i = N_total,  N_low <= N_i <= N_up.
//
// This is a multiple-choice knapsack with an equality constraint, solved
// exactly by dynamic programming over (tasks processed, budget consumed).
// Among optimal allocations the lexicographically smallest vector (in task
// input order) is returned.

#ifndef KNAPSACK_RL_ALLOCATOR_H_
#define KNAPSACK_RL_ALLOCATOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl {

struct AllocationTask {
  std::string task_id;
  std::optional<double> est_p;  // nullopt = unknown
  std::optional<double> greedy_prob;
};

struct AllocationRequest {
  std::vector<AllocationTask> tasks;
  AllocationConfig config;
};

enum class Partition { kZeroRate, kOneRate, kInterior, kUnknown };

std::string_view PartitionName(Partition partition);
Partition PartitionOf(const std::optional<double>& est_p);

struct AllocationTrace {
  BudgetPlan plan;
  // Parallel to plan.allocations.
  std::vector<Partition> partition;
  // Rollouts given to zero-rate tasks.
  int64_t fallback_pool = 0;
  // Sum of task values over interior tasks.
  double objective = 0.0;
};

// Values of one task at consecutive budget levels: values[k] is the value of
// allocating min_level + k rollouts.
struct LevelValues {
  int64_t min_level = 0;
  std::vector<double> values;

  int64_t max_level() const {
    return min_level + static_cast<int64_t>(values.size()) - 1;
  }
};

struct SeparableSolution {
  std::vector<int64_t> levels;
  double objective = 0.0;
};

// Picks one level per item so that the levels sum to `total` and the summed
// value is maximal; ties (within a relative 1e-12) go to the
// lexicographically smallest level vector. Runs in
// O(M * slack * max_range) time where slack = total - sum of min levels.
absl::StatusOr<SeparableSolution> MaximizeSeparable(
    std::span<const LevelValues> items, int64_t total);

// Exhaustive counterpart of MaximizeSeparable with the same tie rule. Fails
// when the product of level ranges exceeds `max_candidates`.
absl::StatusOr<SeparableSolution> BruteForceSeparable(
    std::span<const LevelValues> items, int64_t total,
    int64_t max_candidates = 10'000'000);

// Plain knapsack over all tasks with bounds [n_low, n_up]. Tasks with unknown
// or extreme estimates have zero value and therefore stay at n_low unless
// slack forces more.
absl::StatusOr<AllocationTrace> SolveKnapsack(const AllocationRequest& request);

// Same contract as SolveKnapsack, by enumeration. Test oracle.
absl::StatusOr<AllocationTrace> BruteForceAllocate(
    const AllocationRequest& request);

// Full pipeline with extreme-case handling:
//  (a) p_hat == 1 and unknown tasks receive n_low;
//  (b) interior tasks reserve clamp(HighProbBudget(p_hat, alpha), n_low,
//      n_up);
//  (c) the leftover is split evenly over p_hat == 0 tasks (remainder to the
//      smallest task ids); with no zero-rate task, the leftover
//      is distributed over interior tasks by the knapsack with lower bounds
//      equal to their reservations;
//  (d) anything still unassigned goes round-robin to tasks below n_up.
// When the reservations do not fit (leftover below Z * n_low for Z zero-rate
// tasks), zero-rate tasks get n_low and the interior tasks share the rest
// through the knapsack with bounds [n_low, n_up].
// With fallback disabled this is SolveKnapsack.
absl::StatusOr<AllocationTrace> Allocate(const AllocationRequest& request);

// Homogeneous baseline: every task receives `n_per_task`.
BudgetPlan UniformAllocate(std::span<const AllocationTask> tasks,
                           int64_t n_per_task);

// Filtering baseline: tasks with p_hat in {0, 1} are dropped (0 rollouts),
// the others receive `n_per_task`. Unknown estimates are kept.
BudgetPlan FilterAllocate(std::span<const AllocationTask> tasks,
                          int64_t n_per_task);

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_ALLOCATOR_H_
