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

// Group-relative advantage bookkeeping and gradient-effectiveness metrics.
//
// For a group of binary rewards r_1..r_N the baseline is the mean b, the
// scale is the population standard deviation sigma, and each sample's
// advantage is (r_j - b) / (sigma + 1e-6). A group is effective when it is
// mixed; otherwise every advantage is exactly zero and the group contributes
// no gradient.

#ifndef KNAPSACK_RL_METRICS_H_
#define KNAPSACK_RL_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl {

inline constexpr double kAdvantageEpsilon = 1e-6;

struct GroupOutcome {
  std::string task_id;
  std::vector<uint8_t> rewards;
  double baseline = 0.0;
  double sigma = 0.0;
  std::vector<double> advantages;
  bool effective = false;

  int64_t successes() const;
  int64_t size() const { return static_cast<int64_t>(rewards.size()); }
  bool all_positive() const { return successes() == size(); }
  bool all_negative() const { return successes() == 0; }
};

// Fails on an empty group or a reward outside {0, 1}.
absl::StatusOr<GroupOutcome> GroupAdvantages(std::vector<uint8_t> rewards,
                                             std::string task_id = "");

// Fraction of samples that belong to mixed groups (size-weighted across
// groups of different sizes). Fails on empty input or when all groups are
// empty.
absl::StatusOr<double> EffectiveGradientRatio(
    std::span<const GroupOutcome> groups);

struct ZeroGradientRatios {
  double all_positive = 0.0;
  double all_negative = 0.0;
};

// Per-group fractions of all-success and all-failure groups.
absl::StatusOr<ZeroGradientRatios> ZeroGradientRatiosOf(
    std::span<const GroupOutcome> groups);

// Histogram of the rates over the five status bins.
StatusCounts StatusDistribution(std::span<const double> rates);

struct IterationMetrics {
  int64_t iteration = 0;
  double effective_gradient_ratio = 0.0;
  double zero_grad_all_positive = 0.0;
  double zero_grad_all_negative = 0.0;
  int64_t mixed_groups = 0;
  int64_t total_groups = 0;
  int64_t total_samples = 0;
};

// Groups with zero samples (dropped by a filtering policy) are ignored.
absl::StatusOr<IterationMetrics> ComputeIterationMetrics(
    int64_t iteration, std::span<const GroupOutcome> groups);

inline constexpr char kMetricsCsvHeader[] =
    "iteration,effective_ratio,zero_pos,zero_neg,mixed_groups,total_samples";

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_METRICS_H_
