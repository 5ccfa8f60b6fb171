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

#ifndef KNAPSACK_RL_CLI_TASK_FILE_H_
#define KNAPSACK_RL_CLI_TASK_FILE_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl::cli {

// One record per line: `task_id, est_p, [latent_p], [greedy_prob]`.
// est_p may be "?" (unknown); optional trailing fields may be empty.
// '#' starts a comment. Errors carry "<source>:<line>:".
absl::StatusOr<std::vector<TaskRecord>> ParseTaskFile(std::string_view text,
                                                      std::string_view source);

// Rollout plans, either CSV lines `task_id, rollouts` or the JSON lines
// written by `allocate` (objects with "task_id" and "allocation").
absl::StatusOr<BudgetPlan> ParsePlanFile(std::string_view text,
                                         std::string_view source);

absl::StatusOr<std::string> ReadFile(const std::string& path);

}  // namespace knapsack_rl::cli

#endif  // KNAPSACK_RL_CLI_TASK_FILE_H_
