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

// Spreading a heterogeneous budget plan over W rollout workers.
//
// RandomDispatch treats every rollout as an independent unit job.
// KkPartition keeps each task whole and groups tasks with the largest
// differencing method (Karmarkar-Karp) for multiway number partitioning.

#ifndef KNAPSACK_RL_BALANCER_H_
#define KNAPSACK_RL_BALANCER_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl {

struct JobBlock {
  std::string task_id;
  int64_t jobs = 0;

  friend bool operator==(const JobBlock&, const JobBlock&) = default;
};

struct WorkerSchedule {
  // assignments[w]: jobs of worker w grouped by task, in plan order.
  std::vector<std::vector<JobBlock>> assignments;
  std::vector<int64_t> loads;

  friend bool operator==(const WorkerSchedule&,
                         const WorkerSchedule&) = default;
};

// Each of the plan's unit jobs goes to a worker drawn uniformly at random.
absl::StatusOr<WorkerSchedule> RandomDispatch(const BudgetPlan& plan,
                                              int num_workers, uint64_t seed);

struct TaskGroups {
  // members[g]: indices into the input load vector, ascending.
  std::vector<std::vector<size_t>> members;
  std::vector<int64_t> loads;
};

// Largest differencing method: every load starts as a partial solution with
// one nonempty side; the two partial solutions with the largest spread
// (max side - min side) are repeatedly merged by pairing the heaviest side of
// one with the lightest side of the other until one remains.
absl::StatusOr<TaskGroups> KkPartition(std::span<const int64_t> loads,
                                       int num_workers);

// Whole-task schedule from a grouping of `plan`'s tasks.
WorkerSchedule ScheduleFromGroups(const BudgetPlan& plan,
                                  const TaskGroups& groups);

int64_t Makespan(std::span<const int64_t> loads);
inline int64_t Makespan(const WorkerSchedule& schedule) {
  return Makespan(schedule.loads);
}
inline int64_t Makespan(const TaskGroups& groups) {
  return Makespan(groups.loads);
}

// CSV with header `worker,task_id,jobs`.
void WriteScheduleCsv(const WorkerSchedule& schedule, std::ostream& out);

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_BALANCER_H_
