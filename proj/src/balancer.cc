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

#include "knapsack_rl/balancer.h"

#include <algorithm>
#include <queue>
#include <random>

#include "absl/strings/str_cat.h"
#include "knapsack_rl/format.h"

namespace knapsack_rl {
namespace {

struct Side {
  int64_t sum = 0;
  std::vector<size_t> members;
};

// A w-way split of a subset of the loads, sides sorted by decreasing sum.
struct PartialSolution {
  std::vector<Side> sides;
  // Creation order; breaks spread ties deterministically.
  size_t id = 0;

  int64_t spread() const { return sides.front().sum - sides.back().sum; }
};

struct LargerSpreadFirst {
  bool operator()(const PartialSolution& a, const PartialSolution& b) const {
    if (a.spread() != b.spread()) return a.spread() < b.spread();
    return a.id > b.id;
  }
};

void SortSides(std::vector<Side>& sides) {
  std::sort(sides.begin(), sides.end(), [](const Side& a, const Side& b) {
    if (a.sum != b.sum) return a.sum > b.sum;
    // Nonempty before empty, then by smallest member.
    if (a.members.empty() != b.members.empty()) return b.members.empty();
    return !a.members.empty() && a.members.front() < b.members.front();
  });
}

}  // namespace

absl::StatusOr<WorkerSchedule> RandomDispatch(const BudgetPlan& plan,
                                              int num_workers, uint64_t seed) {
  if (num_workers < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("worker count ", num_workers, " must be at least 1"));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, num_workers - 1);
  WorkerSchedule schedule;
  schedule.assignments.resize(num_workers);
  schedule.loads.assign(num_workers, 0);
  std::vector<int64_t> per_worker(num_workers);
  for (const Allocation& allocation : plan.allocations) {
    std::fill(per_worker.begin(), per_worker.end(), 0);
    for (int64_t job = 0; job < allocation.rollouts; ++job) {
      ++per_worker[pick(rng)];
    }
    for (int w = 0; w < num_workers; ++w) {
      if (per_worker[w] == 0) continue;
      schedule.assignments[w].push_back({allocation.task_id, per_worker[w]});
      schedule.loads[w] += per_worker[w];
    }
  }
  return schedule;
}

absl::StatusOr<TaskGroups> KkPartition(std::span<const int64_t> loads,
                                       int num_workers) {
  if (num_workers < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Karmarkar-Karp grouping needs at least 2 workers, got ", num_workers));
  }
  if (loads.empty()) return absl::InvalidArgumentError("no loads to group");
  for (int64_t load : loads) {
    if (load < 0) return absl::InvalidArgumentError("loads must be >= 0");
  }

  const size_t w = static_cast<size_t>(num_workers);
  std::priority_queue<PartialSolution, std::vector<PartialSolution>,
                      LargerSpreadFirst>
      queue;
  size_t next_id = 0;
  for (size_t i = 0; i < loads.size(); ++i) {
    PartialSolution single;
    single.sides.resize(w);
    single.sides[0] = {loads[i], {i}};
    single.id = next_id++;
    queue.push(std::move(single));
  }
  while (queue.size() > 1) {
    PartialSolution a = queue.top();
    queue.pop();
    PartialSolution b = queue.top();
    queue.pop();
    PartialSolution merged;
    merged.sides.resize(w);
    for (size_t j = 0; j < w; ++j) {
      Side& side = merged.sides[j];
      const Side& heavy = a.sides[j];
      const Side& light = b.sides[w - 1 - j];
      side.sum = heavy.sum + light.sum;
      side.members = heavy.members;
      side.members.insert(side.members.end(), light.members.begin(),
                          light.members.end());
      std::sort(side.members.begin(), side.members.end());
    }
    SortSides(merged.sides);
    merged.id = next_id++;
    queue.push(std::move(merged));
  }

  PartialSolution final_solution = queue.top();
  TaskGroups groups;
  for (Side& side : final_solution.sides) {
    groups.loads.push_back(side.sum);
    groups.members.push_back(std::move(side.members));
  }
  return groups;
}

WorkerSchedule ScheduleFromGroups(const BudgetPlan& plan,
                                  const TaskGroups& groups) {
  WorkerSchedule schedule;
  schedule.assignments.resize(groups.members.size());
  schedule.loads.assign(groups.members.size(), 0);
  for (size_t g = 0; g < groups.members.size(); ++g) {
    for (size_t index : groups.members[g]) {
      const Allocation& allocation = plan.allocations[index];
      schedule.assignments[g].push_back(
          {allocation.task_id, allocation.rollouts});
      schedule.loads[g] += allocation.rollouts;
    }
  }
  return schedule;
}

int64_t Makespan(std::span<const int64_t> loads) {
  int64_t makespan = 0;
  for (int64_t load : loads) makespan = std::max(makespan, load);
  return makespan;
}

void WriteScheduleCsv(const WorkerSchedule& schedule, std::ostream& out) {
  out << "worker,task_id,jobs\n";
  for (size_t w = 0; w < schedule.assignments.size(); ++w) {
    for (const JobBlock& block : schedule.assignments[w]) {
      out << w << ',' << CsvField(block.task_id) << ',' << block.jobs << '\n';
    }
  }
}

}  // namespace knapsack_rl
