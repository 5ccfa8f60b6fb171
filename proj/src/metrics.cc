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

#include "knapsack_rl/metrics.h"

#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"

namespace knapsack_rl {

int64_t GroupOutcome::successes() const {
  return std::accumulate(rewards.begin(), rewards.end(), int64_t{0});
}

absl::StatusOr<GroupOutcome> GroupAdvantages(std::vector<uint8_t> rewards,
                                             std::string task_id) {
  if (rewards.empty()) {
    return absl::InvalidArgumentError("empty reward group");
  }
  int64_t successes = 0;
  for (uint8_t r : rewards) {
    if (r > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("reward ", static_cast<int>(r), " is not binary"));
    }
    successes += r;
  }
  const double n = static_cast<double>(rewards.size());
  GroupOutcome outcome;
  outcome.task_id = std::move(task_id);
  outcome.baseline = static_cast<double>(successes) / n;
  double squares = 0.0;
  for (uint8_t r : rewards) {
    const double d = r - outcome.baseline;
    squares += d * d;
  }
  outcome.sigma = std::sqrt(squares / n);
  outcome.advantages.reserve(rewards.size());
  for (uint8_t r : rewards) {
    outcome.advantages.push_back((r - outcome.baseline) /
                                 (outcome.sigma + kAdvantageEpsilon));
  }
  outcome.effective =
      successes > 0 && successes < static_cast<int64_t>(rewards.size());
  outcome.rewards = std::move(rewards);
  return outcome;
}

absl::StatusOr<double> EffectiveGradientRatio(
    std::span<const GroupOutcome> groups) {
  if (groups.empty()) return absl::InvalidArgumentError("no groups");
  int64_t effective = 0;
  int64_t total = 0;
  for (const GroupOutcome& group : groups) {
    total += group.size();
    if (group.effective) effective += group.size();
  }
  if (total == 0) return absl::InvalidArgumentError("no samples");
  return static_cast<double>(effective) / static_cast<double>(total);
}

absl::StatusOr<ZeroGradientRatios> ZeroGradientRatiosOf(
    std::span<const GroupOutcome> groups) {
  if (groups.empty()) return absl::InvalidArgumentError("no groups");
  int64_t positive = 0;
  int64_t negative = 0;
  for (const GroupOutcome& group : groups) {
    if (group.effective) continue;
    if (group.all_positive()) ++positive;
    else ++negative;
  }
  const double count = static_cast<double>(groups.size());
  return ZeroGradientRatios{positive / count, negative / count};
}

StatusCounts StatusDistribution(std::span<const double> rates) {
  StatusCounts counts{};
  for (double p : rates) ++counts[static_cast<int>(CategorizeStatus(p))];
  return counts;
}

absl::StatusOr<IterationMetrics> ComputeIterationMetrics(
    int64_t iteration, std::span<const GroupOutcome> groups) {
  IterationMetrics metrics;
  metrics.iteration = iteration;
  int64_t effective_samples = 0;
  int64_t positive = 0;
  int64_t negative = 0;
  for (const GroupOutcome& group : groups) {
    if (group.size() == 0) continue;
    ++metrics.total_groups;
    metrics.total_samples += group.size();
    if (group.effective) {
      ++metrics.mixed_groups;
      effective_samples += group.size();
    } else if (group.all_positive()) {
      ++positive;
    } else {
      ++negative;
    }
  }
  if (metrics.total_groups == 0) {
    return absl::InvalidArgumentError("no nonempty groups");
  }
  const double groups_count = static_cast<double>(metrics.total_groups);
  metrics.effective_gradient_ratio =
      static_cast<double>(effective_samples) / metrics.total_samples;
  metrics.zero_grad_all_positive = positive / groups_count;
  metrics.zero_grad_all_negative = negative / groups_count;
  return metrics;
}

}  // namespace knapsack_rl
