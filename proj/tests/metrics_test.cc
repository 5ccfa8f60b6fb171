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

#include "generators.h"
#include "gtest/gtest.h"
#include "knapsack_rl/value_model.h"

namespace knapsack_rl {
namespace {

std::vector<GroupOutcome> Groups(
    const std::vector<std::vector<uint8_t>>& rewards) {
  std::vector<GroupOutcome> groups;
  for (const auto& r : rewards) groups.push_back(*GroupAdvantages(r));
  return groups;
}

TEST(GroupAdvantagesTest, AllSuccess) {
  auto group = GroupAdvantages({1, 1, 1, 1}, "q");
  ASSERT_TRUE(group.ok());
  EXPECT_EQ(group->task_id, "q");
  EXPECT_EQ(group->baseline, 1.0);
  EXPECT_EQ(group->sigma, 0.0);
  EXPECT_EQ(group->advantages, (std::vector<double>(4, 0.0)));
  EXPECT_FALSE(group->effective);
  EXPECT_TRUE(group->all_positive());
}

TEST(GroupAdvantagesTest, Pair) {
  auto group = GroupAdvantages({1, 0});
  ASSERT_TRUE(group.ok());
  EXPECT_EQ(group->baseline, 0.5);
  EXPECT_EQ(group->sigma, 0.5);
  const double expected = 0.5 / (0.5 + 1e-6);
  EXPECT_DOUBLE_EQ(group->advantages[0], expected);
  EXPECT_DOUBLE_EQ(group->advantages[1], -expected);
  EXPECT_NEAR(expected, 0.999998, 1e-6);
  EXPECT_TRUE(group->effective);
}

TEST(GroupAdvantagesTest, OneSuccessInEight) {
  auto group = GroupAdvantages({1, 0, 0, 0, 0, 0, 0, 0});
  ASSERT_TRUE(group.ok());
  EXPECT_DOUBLE_EQ(group->baseline, 0.125);
  EXPECT_NEAR(group->sigma, std::sqrt(0.109375), 1e-15);
  EXPECT_NEAR(group->sigma, 0.33072, 1e-5);
  for (double a : group->advantages) EXPECT_NE(a, 0.0);
  EXPECT_TRUE(group->effective);
}

TEST(GroupAdvantagesTest, Errors) {
  EXPECT_FALSE(GroupAdvantages({}).ok());
  EXPECT_FALSE(GroupAdvantages({1, 2}).ok());
}

TEST(GroupAdvantagesPropertyTest, ZeroMeanAndEffectiveness) {
  testing::Gen gen(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const int64_t n = gen.Int(1, 130);
    const std::vector<uint8_t> rewards = gen.Rewards(n, gen.Real(0.0, 1.0));
    const GroupOutcome group = *GroupAdvantages(rewards);
    const double mean =
        std::accumulate(group.advantages.begin(), group.advantages.end(),
                        0.0) /
        static_cast<double>(n);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    const int64_t successes = std::accumulate(rewards.begin(), rewards.end(),
                                              int64_t{0});
    EXPECT_EQ(group.effective, successes > 0 && successes < n);
    for (double a : group.advantages) {
      EXPECT_EQ(a != 0.0, group.effective);
    }
  }
}

TEST(EffectiveGradientRatioTest, Examples) {
  EXPECT_EQ(*EffectiveGradientRatio(Groups({{1, 0}, {0, 1, 1}})), 1.0);
  EXPECT_DOUBLE_EQ(*EffectiveGradientRatio(Groups({{1, 0}, {1, 1}, {0, 0}})),
                   2.0 / 6.0);
  std::vector<uint8_t> big(93, 0);
  big[0] = 1;
  EXPECT_DOUBLE_EQ(*EffectiveGradientRatio(Groups({big, {0, 0}})),
                   93.0 / 95.0);
  EXPECT_FALSE(EffectiveGradientRatio({}).ok());
}

TEST(ZeroGradientRatiosTest, Examples) {
  auto ratios = ZeroGradientRatiosOf(Groups({{1, 1}, {0, 0}, {1, 0}, {1, 0}}));
  ASSERT_TRUE(ratios.ok());
  EXPECT_EQ(ratios->all_positive, 0.25);
  EXPECT_EQ(ratios->all_negative, 0.25);
  auto mixed = ZeroGradientRatiosOf(Groups({{1, 0}, {0, 1}}));
  EXPECT_EQ(mixed->all_positive, 0.0);
  EXPECT_EQ(mixed->all_negative, 0.0);
  EXPECT_FALSE(ZeroGradientRatiosOf({}).ok());
}

TEST(ZeroGradientRatiosTest, HardPopulationMostlyAllNegative) {
  testing::Gen gen(2);
  std::vector<GroupOutcome> groups;
  for (int i = 0; i < 10000; ++i) {
    groups.push_back(*GroupAdvantages(gen.Rewards(8, 0.02)));
  }
  EXPECT_GT(ZeroGradientRatiosOf(groups)->all_negative, 0.8);
}

TEST(UniformSizePropertyTest, RatioEqualsMixedFraction) {
  testing::Gen gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t n = gen.Int(1, 16);
    std::vector<GroupOutcome> groups;
    int64_t mixed = 0;
    for (int64_t g = gen.Int(1, 50); g > 0; --g) {
      groups.push_back(*GroupAdvantages(gen.Rewards(n, gen.Real(0.0, 1.0))));
      mixed += groups.back().effective ? 1 : 0;
    }
    const double ratio = *EffectiveGradientRatio(groups);
    const ZeroGradientRatios zero = *ZeroGradientRatiosOf(groups);
    EXPECT_DOUBLE_EQ(ratio, static_cast<double>(mixed) / groups.size());
    EXPECT_NEAR(ratio, 1.0 - zero.all_positive - zero.all_negative, 1e-12);
  }
}

TEST(EffectiveGradientRatioMonteCarloTest, MatchesClosedForm) {
  testing::Gen gen(6);
  constexpr int kGroups = 100000;
  std::vector<GroupOutcome> groups;
  groups.reserve(kGroups);
  for (int i = 0; i < kGroups; ++i) {
    groups.push_back(*GroupAdvantages(gen.Rewards(8, 0.5)));
  }
  const double q = *ProbNonZeroGradient(Algorithm::kGrpo, 8, 0.5);
  const double sigma = std::sqrt(q * (1.0 - q) / kGroups);
  EXPECT_NEAR(*EffectiveGradientRatio(groups), q, 3.0 * sigma);
}

TEST(StatusDistributionTest, Examples) {
  const std::vector<double> solved(7, 1.0);
  EXPECT_EQ(StatusDistribution(solved), (StatusCounts{0, 0, 0, 0, 7}));
  const std::vector<double> spread = {0.0, 0.1, 0.5, 0.9, 1.0};
  EXPECT_EQ(StatusDistribution(spread), (StatusCounts{1, 1, 1, 1, 1}));
}

TEST(ComputeIterationMetricsTest, FractionsSumToOneAndSkipEmpty) {
  std::vector<GroupOutcome> groups = Groups({{1, 1}, {0, 0, 0}, {1, 0, 1, 0}});
  groups.push_back(GroupOutcome{});
  auto metrics = ComputeIterationMetrics(4, groups);
  ASSERT_TRUE(metrics.ok());
  EXPECT_EQ(metrics->iteration, 4);
  EXPECT_EQ(metrics->total_groups, 3);
  EXPECT_EQ(metrics->mixed_groups, 1);
  EXPECT_EQ(metrics->total_samples, 9);
  EXPECT_DOUBLE_EQ(metrics->effective_gradient_ratio, 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(metrics->zero_grad_all_positive +
                       metrics->zero_grad_all_negative +
                       static_cast<double>(metrics->mixed_groups) /
                           metrics->total_groups,
                   1.0);
  EXPECT_FALSE(ComputeIterationMetrics(0, std::vector<GroupOutcome>(2)).ok());
}

}  // namespace
}  // namespace knapsack_rl
