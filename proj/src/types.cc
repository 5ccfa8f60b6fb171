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

#include "knapsack_rl/types.h"

#include <cstdio>
#include <cstdlib>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"

namespace knapsack_rl {
namespace internal {

void CheckFailed(const char* file, int line, const char* expr,
                 std::string_view message) {
  std::fprintf(stderr, "%s:%d: check failed: %s: %.*s\n", file, line, expr,
               static_cast<int>(message.size()), message.data());
  std::abort();
}

}  // namespace internal

StatusCategory CategorizeStatus(double p) {
  KRL_CHECK(IsProbability(p), "success rate must lie in [0, 1]");
  if (p == 0.0) return StatusCategory::kExtremelyHard;
  if (p <= 0.2) return StatusCategory::kHard;
  if (p < 0.8) return StatusCategory::kMedium;
  if (p < 1.0) return StatusCategory::kEasy;
  return StatusCategory::kExtremelyEasy;
}

std::string_view StatusCategoryName(StatusCategory category) {
  switch (category) {
    case StatusCategory::kExtremelyHard:
      return "extremely-hard";
    case StatusCategory::kHard:
      return "hard";
    case StatusCategory::kMedium:
      return "medium";
    case StatusCategory::kEasy:
      return "easy";
    case StatusCategory::kExtremelyEasy:
      return "extremely-easy";
  }
  return "unknown";
}

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kGrpo:
      return "GRPO";
    case Algorithm::kRloo:
      return "RLOO";
    case Algorithm::kReinforce:
      return "REINFORCE";
    case Algorithm::kRemax:
      return "ReMax";
  }
  return "unknown";
}

absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name) {
  const std::string lower = absl::AsciiStrToLower(std::string(name));
  if (lower == "grpo") return Algorithm::kGrpo;
  if (lower == "rloo") return Algorithm::kRloo;
  if (lower == "reinforce") return Algorithm::kReinforce;
  if (lower == "remax") return Algorithm::kRemax;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown algorithm '", std::string(name),
                   "' (expected GRPO, RLOO, REINFORCE or ReMax)"));
}

std::optional<StatusCategory> TaskRecord::status() const {
  if (!est_p.has_value()) return std::nullopt;
  return CategorizeStatus(*est_p);
}

absl::Status ValidateTaskRecord(const TaskRecord& task) {
  if (task.task_id.empty()) {
    return absl::InvalidArgumentError("task_id must not be empty");
  }
  const auto check_probability = [&](const std::optional<double>& value,
                                     std::string_view field) -> absl::Status {
    if (value.has_value() && !IsProbability(*value)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "task ", task.task_id, ": ", std::string(field), " = ", *value,
          " is outside [0, 1]"));
    }
    return absl::OkStatus();
  };
  if (auto s = check_probability(task.est_p, "est_p"); !s.ok()) return s;
  if (auto s = check_probability(task.latent_p, "latent_p"); !s.ok()) return s;
  if (auto s = check_probability(task.greedy_prob, "greedy_prob"); !s.ok()) {
    return s;
  }
  for (const EpochCounts& counts : task.epoch_history) {
    if (counts.successes < 0 || counts.successes > counts.trials) {
      return absl::InvalidArgumentError(absl::StrCat(
          "task ", task.task_id, ": history entry has ", counts.successes,
          " successes out of ", counts.trials, " trials"));
    }
  }
  return absl::OkStatus();
}

std::optional<ConfigViolation> ValidateConfig(const AllocationConfig& config,
                                              int64_t num_tasks) {
  using C = ConfigViolation::Constraint;
  if (config.n_total < 1) {
    return ConfigViolation{C::kTotalNotPositive,
                           absl::StrCat("n_total = ", config.n_total,
                                        " must be at least 1")};
  }
  if (config.n_low < 1) {
    return ConfigViolation{
        C::kLowBelowOne,
        absl::StrCat("n_low = ", config.n_low, " must be at least 1")};
  }
  if (config.n_up < config.n_low) {
    return ConfigViolation{C::kUpBelowLow,
                           absl::StrCat("n_up = ", config.n_up,
                                        " is below n_low = ", config.n_low)};
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    return ConfigViolation{
        C::kAlphaOutOfRange,
        absl::StrCat("alpha = ", config.alpha, " must lie in (0, 1)")};
  }
  if (num_tasks * config.n_low > config.n_total) {
    return ConfigViolation{
        C::kTotalBelowLowerBound,
        absl::StrCat("n_total = ", config.n_total, " < M * n_low = ",
                     num_tasks, " * ", config.n_low)};
  }
  if (num_tasks * config.n_up < config.n_total) {
    return ConfigViolation{
        C::kTotalAboveUpperBound,
        absl::StrCat("n_total = ", config.n_total, " > M * n_up = ", num_tasks,
                     " * ", config.n_up)};
  }
  return std::nullopt;
}

std::optional<int64_t> BudgetPlan::RolloutsFor(std::string_view task_id) const {
  for (const Allocation& allocation : allocations) {
    if (allocation.task_id == task_id) return allocation.rollouts;
  }
  return std::nullopt;
}

std::vector<int64_t> BudgetPlan::Counts() const {
  std::vector<int64_t> counts;
  counts.reserve(allocations.size());
  for (const Allocation& allocation : allocations) {
    counts.push_back(allocation.rollouts);
  }
  return counts;
}

}  // namespace knapsack_rl
