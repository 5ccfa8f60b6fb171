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

#include "knapsack_rl/allocator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"
#include "knapsack_rl/value_model.h"

namespace knapsack_rl {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRelativeTieTolerance = 1e-12;

double TieTolerance(double best) {
  return kRelativeTieTolerance * std::abs(best);
}

absl::Status CheckItems(std::span<const LevelValues> items, int64_t total,
                        int64_t* min_sum) {
  int64_t lo = 0;
  int64_t hi = 0;
  for (const LevelValues& item : items) {
    if (item.values.empty()) {
      return absl::InvalidArgumentError("item has no admissible level");
    }
    if (item.min_level < 0) {
      return absl::InvalidArgumentError("levels must be nonnegative");
    }
    lo += item.min_level;
    hi += item.max_level();
  }
  if (total < lo || total > hi) {
    return absl::OutOfRangeError(
        absl::StrCat("infeasible budget ", total, ": admissible totals are [",
                     lo, ", ", hi, "]"));
  }
  *min_sum = lo;
  return absl::OkStatus();
}

double ObjectiveOf(std::span<const LevelValues> items,
                   const std::vector<int64_t>& levels) {
  double objective = 0.0;
  for (size_t i = 0; i < items.size(); ++i) {
    objective += items[i].values[levels[i] - items[i].min_level];
  }
  return objective;
}

absl::Status CheckRequest(const AllocationRequest& request) {
  if (request.tasks.empty()) {
    return absl::InvalidArgumentError("no tasks");
  }
  std::set<std::string_view> seen;
  for (const AllocationTask& task : request.tasks) {
    if (!seen.insert(task.task_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate task_id '", task.task_id, "'"));
    }
    if (task.est_p.has_value() && !IsProbability(*task.est_p)) {
      return absl::InvalidArgumentError(
          absl::StrCat("task ", task.task_id, ": est_p = ", *task.est_p,
                       " is outside [0, 1]"));
    }
  }
  const auto violation = ValidateConfig(
      request.config, static_cast<int64_t>(request.tasks.size()));
  if (violation.has_value()) {
    using C = ConfigViolation::Constraint;
    if (violation->constraint == C::kTotalBelowLowerBound ||
        violation->constraint == C::kTotalAboveUpperBound) {
      return absl::OutOfRangeError(
          absl::StrCat("infeasible: ", violation->message));
    }
    return absl::InvalidArgumentError(violation->message);
  }
  return absl::OkStatus();
}

// Task value at levels [lo, hi]; unknown estimates are worth nothing.
absl::StatusOr<LevelValues> ValueLevels(const AllocationTask& task,
                                        Algorithm algorithm, int64_t lo,
                                        int64_t hi) {
  LevelValues item;
  item.min_level = lo;
  item.values.assign(hi - lo + 1, 0.0);
  if (!task.est_p.has_value()) return item;
  for (int64_t n = lo; n <= hi; ++n) {
    absl::StatusOr<double> value =
        TaskValue(algorithm, n, *task.est_p, task.greedy_prob);
    if (!value.ok()) {
      return absl::Status(value.status().code(),
                          absl::StrCat("task ", task.task_id, ": ",
                                       value.status().message()));
    }
    item.values[n - lo] = *value;
  }
  return item;
}

absl::StatusOr<double> InteriorObjective(const AllocationRequest& request,
                                         const std::vector<int64_t>& counts) {
  double objective = 0.0;
  for (size_t i = 0; i < request.tasks.size(); ++i) {
    const AllocationTask& task = request.tasks[i];
    if (PartitionOf(task.est_p) != Partition::kInterior) continue;
    absl::StatusOr<double> value = TaskValue(
        request.config.algorithm, counts[i], *task.est_p, task.greedy_prob);
    if (!value.ok()) return value.status();
    objective += *value;
  }
  return objective;
}

absl::StatusOr<AllocationTrace> MakeTrace(const AllocationRequest& request,
                                          const std::vector<int64_t>& counts) {
  AllocationTrace trace;
  trace.plan.allocations.reserve(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    const AllocationTask& task = request.tasks[i];
    trace.plan.allocations.push_back({task.task_id, counts[i]});
    trace.plan.total += counts[i];
    const Partition partition = PartitionOf(task.est_p);
    trace.partition.push_back(partition);
    if (partition == Partition::kZeroRate) trace.fallback_pool += counts[i];
  }
  trace.plan.requested_total = request.config.n_total;
  trace.plan.exact_budget = true;
  absl::StatusOr<double> objective = InteriorObjective(request, counts);
  if (!objective.ok()) return objective.status();
  trace.objective = *objective;
  return trace;
}

// Shared front half of SolveKnapsack and BruteForceAllocate.
absl::StatusOr<std::vector<LevelValues>> PlainKnapsackItems(
    const AllocationRequest& request) {
  if (auto s = CheckRequest(request); !s.ok()) return s;
  const AllocationConfig& config = request.config;
  const int64_t m = static_cast<int64_t>(request.tasks.size());
  // No task can exceed what is left after everyone else takes n_low.
  const int64_t hi =
      std::min(config.n_up, config.n_total - (m - 1) * config.n_low);
  std::vector<LevelValues> items;
  items.reserve(request.tasks.size());
  for (const AllocationTask& task : request.tasks) {
    absl::StatusOr<LevelValues> item =
        ValueLevels(task, config.algorithm, config.n_low, hi);
    if (!item.ok()) return item.status();
    items.push_back(*std::move(item));
  }
  return items;
}

}  // namespace

std::string_view PartitionName(Partition partition) {
  switch (partition) {
    case Partition::kZeroRate:
      return "zero-rate";
    case Partition::kOneRate:
      return "one-rate";
    case Partition::kInterior:
      return "interior";
    case Partition::kUnknown:
      return "unknown";
  }
  return "unknown";
}

Partition PartitionOf(const std::optional<double>& est_p) {
  if (!est_p.has_value()) return Partition::kUnknown;
  if (*est_p == 0.0) return Partition::kZeroRate;
  if (*est_p == 1.0) return Partition::kOneRate;
  return Partition::kInterior;
}

absl::StatusOr<SeparableSolution> MaximizeSeparable(
    std::span<const LevelValues> items, int64_t total) {
  int64_t min_sum = 0;
  if (auto s = CheckItems(items, total, &min_sum); !s.ok()) return s;
  const size_t m = items.size();
  const int64_t slack = total - min_sum;
  const size_t width = static_cast<size_t>(slack) + 1;

  // best[i * width + b]: maximal value of items i..m-1 using exactly b extra
  // rollouts above their minimum levels.
  std::vector<double> best((m + 1) * width, kNegInf);
  best[m * width + 0] = 0.0;
  int64_t reach = 0;
  for (size_t i = m; i-- > 0;) {
    const std::vector<double>& values = items[i].values;
    const int64_t range = static_cast<int64_t>(values.size()) - 1;
    reach = std::min(slack, reach + range);
    const double* next = &best[(i + 1) * width];
    double* row = &best[i * width];
    for (int64_t b = 0; b <= reach; ++b) {
      double row_best = kNegInf;
      const int64_t k_max = std::min(range, b);
      for (int64_t k = 0; k <= k_max; ++k) {
        const double candidate = values[k] + next[b - k];
        if (candidate > row_best) row_best = candidate;
      }
      row[b] = row_best;
    }
  }

  const double tolerance = TieTolerance(best[slack]);
  SeparableSolution solution;
  solution.levels.resize(m);
  int64_t remaining = slack;
  for (size_t i = 0; i < m; ++i) {
    const std::vector<double>& values = items[i].values;
    const int64_t range = static_cast<int64_t>(values.size()) - 1;
    const double target = best[i * width + remaining] - tolerance;
    const double* next = &best[(i + 1) * width];
    int64_t chosen = -1;
    for (int64_t k = 0; k <= std::min(range, remaining); ++k) {
      if (values[k] + next[remaining - k] >= target) {
        chosen = k;
        break;
      }
    }
    KRL_CHECK(chosen >= 0, "knapsack reconstruction lost the optimum");
    solution.levels[i] = items[i].min_level + chosen;
    remaining -= chosen;
  }
  solution.objective = ObjectiveOf(items, solution.levels);
  return solution;
}

absl::StatusOr<SeparableSolution> BruteForceSeparable(
    std::span<const LevelValues> items, int64_t total,
    int64_t max_candidates) {
  int64_t min_sum = 0;
  if (auto s = CheckItems(items, total, &min_sum); !s.ok()) return s;
  int64_t space = 1;
  for (const LevelValues& item : items) {
    const int64_t size = static_cast<int64_t>(item.values.size());
    if (space > max_candidates / size) {
      return absl::ResourceExhaustedError(absl::StrCat(
          "search space too large for enumeration (limit ", max_candidates,
          " candidates)"));
    }
    space *= size;
  }

  const size_t m = items.size();
  // Largest total reachable by items i..m-1, for pruning.
  std::vector<int64_t> suffix_max(m + 1, 0);
  std::vector<int64_t> suffix_min(m + 1, 0);
  for (size_t i = m; i-- > 0;) {
    suffix_max[i] = suffix_max[i + 1] + items[i].max_level();
    suffix_min[i] = suffix_min[i + 1] + items[i].min_level;
  }

  std::vector<int64_t> levels(m, 0);
  // Visits every feasible vector in lexicographic order; `visit` returns
  // false to stop.
  const auto enumerate = [&](auto&& visit) {
    const auto recurse = [&](auto&& self, size_t i, int64_t remaining) -> bool {
      if (i == m) return remaining != 0 || visit(levels);
      for (int64_t level = items[i].min_level; level <= items[i].max_level();
           ++level) {
        const int64_t rest = remaining - level;
        if (rest < suffix_min[i + 1]) break;
        if (rest > suffix_max[i + 1]) continue;
        levels[i] = level;
        if (!self(self, i + 1, rest)) return false;
      }
      return true;
    };
    recurse(recurse, 0, total);
  };

  double best = kNegInf;
  enumerate([&](const std::vector<int64_t>& candidate) {
    best = std::max(best, ObjectiveOf(items, candidate));
    return true;
  });
  const double threshold = best - TieTolerance(best);
  SeparableSolution solution;
  enumerate([&](const std::vector<int64_t>& candidate) {
    const double objective = ObjectiveOf(items, candidate);
    if (objective >= threshold) {
      solution.levels = candidate;
      solution.objective = objective;
      return false;
    }
    return true;
  });
  return solution;
}

absl::StatusOr<AllocationTrace> SolveKnapsack(
    const AllocationRequest& request) {
  absl::StatusOr<std::vector<LevelValues>> items = PlainKnapsackItems(request);
  if (!items.ok()) return items.status();
  absl::StatusOr<SeparableSolution> solution =
      MaximizeSeparable(*items, request.config.n_total);
  if (!solution.ok()) return solution.status();
  return MakeTrace(request, solution->levels);
}

absl::StatusOr<AllocationTrace> BruteForceAllocate(
    const AllocationRequest& request) {
  absl::StatusOr<std::vector<LevelValues>> items = PlainKnapsackItems(request);
  if (!items.ok()) return items.status();
  absl::StatusOr<SeparableSolution> solution =
      BruteForceSeparable(*items, request.config.n_total);
  if (!solution.ok()) return solution.status();
  return MakeTrace(request, solution->levels);
}

absl::StatusOr<AllocationTrace> Allocate(const AllocationRequest& request) {
  if (!request.config.fallback_enabled) return SolveKnapsack(request);
  if (auto s = CheckRequest(request); !s.ok()) return s;

  const AllocationConfig& config = request.config;
  const size_t m = request.tasks.size();
  std::vector<int64_t> counts(m, 0);
  std::vector<size_t> zero_rate;
  std::vector<size_t> interior;
  std::vector<int64_t> reserve(m, 0);
  int64_t used = 0;
  for (size_t i = 0; i < m; ++i) {
    const AllocationTask& task = request.tasks[i];
    switch (PartitionOf(task.est_p)) {
      case Partition::kUnknown:
      case Partition::kOneRate:
        counts[i] = config.n_low;
        used += config.n_low;
        break;
      case Partition::kZeroRate:
        zero_rate.push_back(i);
        break;
      case Partition::kInterior: {
        absl::StatusOr<int64_t> budget =
            HighProbBudget(*task.est_p, config.alpha);
        if (!budget.ok()) return budget.status();
        reserve[i] = std::clamp(*budget, config.n_low, config.n_up);
        used += reserve[i];
        interior.push_back(i);
        break;
      }
    }
  }

  // Knapsack over the interior tasks with per-task lower bounds; whatever
  // exceeds their joint capacity is returned as unassigned.
  const auto fill_interior = [&](int64_t budget,
                                 bool use_reserve) -> absl::StatusOr<int64_t> {
    if (interior.empty()) return budget;
    std::vector<LevelValues> items;
    items.reserve(interior.size());
    int64_t lo_sum = 0;
    for (size_t i : interior) {
      const int64_t lo = use_reserve ? reserve[i] : config.n_low;
      lo_sum += lo;
      absl::StatusOr<LevelValues> item =
          ValueLevels(request.tasks[i], config.algorithm, lo, config.n_up);
      if (!item.ok()) return item.status();
      items.push_back(*std::move(item));
    }
    const int64_t capacity =
        static_cast<int64_t>(interior.size()) * config.n_up;
    const int64_t solved_budget = std::min(budget, capacity);
    KRL_CHECK(solved_budget >= lo_sum, "interior lower bounds exceed budget");
    absl::StatusOr<SeparableSolution> solution =
        MaximizeSeparable(items, solved_budget);
    if (!solution.ok()) return solution.status();
    for (size_t j = 0; j < interior.size(); ++j) {
      counts[interior[j]] = solution->levels[j];
    }
    return budget - solved_budget;
  };

  const int64_t num_zero = static_cast<int64_t>(zero_rate.size());
  const int64_t leftover = config.n_total - used;
  int64_t unassigned = 0;
  if (num_zero > 0 && leftover >= num_zero * config.n_low) {
    for (size_t i : interior) counts[i] = reserve[i];
    const int64_t share = leftover / num_zero;
    int64_t extra = leftover % num_zero;
    // The remainder goes to the smallest task ids.
    std::vector<size_t> by_id = zero_rate;
    std::sort(by_id.begin(), by_id.end(), [&](size_t a, size_t b) {
      return request.tasks[a].task_id < request.tasks[b].task_id;
    });
    for (size_t i : by_id) {
      const int64_t wanted = share + (extra > 0 ? 1 : 0);
      if (extra > 0) --extra;
      counts[i] = std::clamp(wanted, config.n_low, config.n_up);
      unassigned += wanted - counts[i];
    }
  } else if (num_zero == 0 && leftover >= 0) {
    int64_t interior_budget = leftover;
    for (size_t i : interior) interior_budget += reserve[i];
    absl::StatusOr<int64_t> rest =
        fill_interior(interior_budget, /*use_reserve=*/true);
    if (!rest.ok()) return rest.status();
    unassigned = *rest;
  } else {
    // Reservations do not fit: unsolved tasks keep the floor and the
    // interior tasks compete for the rest.
    int64_t interior_budget = config.n_total;
    for (size_t i = 0; i < m; ++i) {
      if (PartitionOf(request.tasks[i].est_p) == Partition::kInterior) continue;
      counts[i] = config.n_low;
      interior_budget -= config.n_low;
    }
    absl::StatusOr<int64_t> rest =
        fill_interior(interior_budget, /*use_reserve=*/false);
    if (!rest.ok()) return rest.status();
    unassigned = *rest;
  }

  while (unassigned > 0) {
    bool progressed = false;
    for (size_t i = 0; i < m && unassigned > 0; ++i) {
      if (counts[i] < config.n_up) {
        ++counts[i];
        --unassigned;
        progressed = true;
      }
    }
    KRL_CHECK(progressed, "budget exceeds M * n_up after validation");
  }
  return MakeTrace(request, counts);
}

BudgetPlan UniformAllocate(std::span<const AllocationTask> tasks,
                           int64_t n_per_task) {
  KRL_CHECK(n_per_task >= 1, "n_per_task must be at least 1");
  BudgetPlan plan;
  plan.allocations.reserve(tasks.size());
  for (const AllocationTask& task : tasks) {
    plan.allocations.push_back({task.task_id, n_per_task});
    plan.total += n_per_task;
  }
  plan.requested_total = plan.total;
  return plan;
}

BudgetPlan FilterAllocate(std::span<const AllocationTask> tasks,
                          int64_t n_per_task) {
  KRL_CHECK(n_per_task >= 1, "n_per_task must be at least 1");
  BudgetPlan plan;
  plan.allocations.reserve(tasks.size());
  for (const AllocationTask& task : tasks) {
    const Partition partition = PartitionOf(task.est_p);
    const bool dropped =
        partition == Partition::kZeroRate || partition == Partition::kOneRate;
    const int64_t rollouts = dropped ? 0 : n_per_task;
    plan.allocations.push_back({task.task_id, rollouts});
    plan.total += rollouts;
  }
  plan.requested_total = static_cast<int64_t>(tasks.size()) * n_per_task;
  plan.exact_budget = false;
  return plan;
}

}  // namespace knapsack_rl
