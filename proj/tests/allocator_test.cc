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

#include <cmath>
#include <cstdlib>
#include <functional>

#include "generators.h"
#include "gtest/gtest.h"
#include "knapsack_rl/value_model.h"

namespace knapsack_rl {
namespace {

AllocationRequest MakeRequest(const std::vector<std::optional<double>>& rates,
                              int64_t n_total, int64_t n_low, int64_t n_up,
                              bool fallback = false) {
  AllocationRequest request;
  request.config.n_total = n_total;
  request.config.n_low = n_low;
  request.config.n_up = n_up;
  request.config.fallback_enabled = fallback;
  for (size_t i = 0; i < rates.size(); ++i) {
    request.tasks.push_back({"task" + std::to_string(i), rates[i], {}});
  }
  return request;
}

const std::vector<std::optional<double>> kFallbackRates = {0.0, 0.9, 1.0, 1.0,
                                                           1.0, 1.0, 1.0, 1.0};

double ValueOf(const AllocationTask& task, Algorithm algorithm, int64_t n) {
  if (!task.est_p.has_value()) return 0.0;
  return *TaskValue(algorithm, n, *task.est_p, task.greedy_prob);
}

struct Enumerated {
  double objective = -1.0;
  std::vector<int64_t> counts;
};

// Depth-first enumeration of every feasible vector. First pass finds the
// optimum; second pass keeps the first vector (lexicographic order) that is
// within a relative 1e-12 of it.
Enumerated EnumerateOptimum(const AllocationRequest& request) {
  const AllocationConfig& config = request.config;
  const size_t m = request.tasks.size();
  std::vector<int64_t> counts(m);
  Enumerated best;
  std::optional<std::vector<int64_t>> chosen;
  std::function<void(size_t, int64_t, double, int)> visit =
      [&](size_t i, int64_t remaining, double value, int pass) {
        if (i == m) {
          if (remaining != 0) return;
          if (pass == 0) {
            best.objective = std::max(best.objective, value);
          } else if (!chosen.has_value() &&
                     value >= best.objective -
                                  1e-12 * std::abs(best.objective)) {
            chosen = counts;
          }
          return;
        }
        for (int64_t n = config.n_low; n <= config.n_up && n <= remaining;
             ++n) {
          counts[i] = n;
          visit(i + 1, remaining - n,
                value + ValueOf(request.tasks[i], config.algorithm, n), pass);
        }
      };
  visit(0, config.n_total, 0.0, 0);
  visit(0, config.n_total, 0.0, 1);
  best.counts = *chosen;
  return best;
}

bool WithinRelative(double a, double b, double tolerance) {
  return std::abs(a - b) <= tolerance * std::max(1.0, std::abs(b));
}

void ExpectFeasible(const AllocationTrace& trace,
                    const AllocationConfig& config) {
  int64_t sum = 0;
  for (const Allocation& allocation : trace.plan.allocations) {
    EXPECT_GE(allocation.rollouts, config.n_low);
    EXPECT_LE(allocation.rollouts, config.n_up);
    sum += allocation.rollouts;
  }
  EXPECT_EQ(sum, config.n_total);
  EXPECT_EQ(trace.plan.total, config.n_total);
  EXPECT_TRUE(trace.plan.exact_budget);
}

TEST(PartitionTest, Labels) {
  EXPECT_EQ(PartitionOf(0.0), Partition::kZeroRate);
  EXPECT_EQ(PartitionOf(1.0), Partition::kOneRate);
  EXPECT_EQ(PartitionOf(0.5), Partition::kInterior);
  EXPECT_EQ(PartitionOf(std::nullopt), Partition::kUnknown);
  EXPECT_EQ(PartitionName(Partition::kZeroRate), "zero-rate");
}

TEST(SolveKnapsackTest, SingleTaskTakesWholeBudget) {
  auto trace = SolveKnapsack(MakeRequest({0.5}, 8, 2, 128));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->plan.Counts(), (std::vector<int64_t>{8}));
}

TEST(SolveKnapsackTest, FallbackTableWithoutFallback) {
  auto trace = SolveKnapsack(MakeRequest(kFallbackRates, 64, 2, 128));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->plan.Counts(),
            (std::vector<int64_t>{2, 50, 2, 2, 2, 2, 2, 2}));
}

TEST(SolveKnapsackTest, ThreeTaskInstanceMatchesEnumeration) {
  const AllocationRequest request = MakeRequest({0.1, 0.33, 0.9}, 12, 2, 8);
  auto trace = SolveKnapsack(request);
  ASSERT_TRUE(trace.ok());
  const Enumerated oracle = EnumerateOptimum(request);
  EXPECT_EQ(trace->plan.Counts(), oracle.counts);
  EXPECT_TRUE(WithinRelative(trace->objective, oracle.objective, 1e-12));
  // Frozen from the enumeration above.
  EXPECT_EQ(trace->plan.Counts(), (std::vector<int64_t>{4, 6, 2}));
  auto brute = BruteForceAllocate(request);
  ASSERT_TRUE(brute.ok());
  EXPECT_EQ(brute->objective, trace->objective);
}

TEST(SolveKnapsackTest, Infeasible) {
  auto low = SolveKnapsack(MakeRequest({0.5, 0.5}, 3, 2, 8));
  EXPECT_EQ(low.status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_NE(low.status().message().find("n_low"), std::string::npos);
  auto high = SolveKnapsack(MakeRequest({0.5, 0.5}, 17, 2, 8));
  EXPECT_EQ(high.status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_NE(high.status().message().find("n_up"), std::string::npos);
}

TEST(SolveKnapsackTest, RequestErrors) {
  auto empty = SolveKnapsack(MakeRequest({}, 8, 2, 8));
  EXPECT_EQ(empty.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(empty.status().message().find("no tasks"), std::string::npos);
  AllocationRequest duplicate = MakeRequest({0.5, 0.5}, 8, 2, 8);
  duplicate.tasks[1].task_id = duplicate.tasks[0].task_id;
  EXPECT_FALSE(SolveKnapsack(duplicate).ok());
  EXPECT_FALSE(SolveKnapsack(MakeRequest({1.5}, 8, 2, 8)).ok());
  AllocationRequest bad_alpha = MakeRequest({0.5}, 8, 2, 8);
  bad_alpha.config.alpha = 0.0;
  EXPECT_EQ(SolveKnapsack(bad_alpha).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(AllocateTest, FallbackTableWithFallback) {
  auto trace = Allocate(MakeRequest(kFallbackRates, 64, 2, 128, true));
  ASSERT_TRUE(trace.ok());
  const std::vector<int64_t> reported = {29, 23, 2, 2, 2, 2, 2, 2};
  const std::vector<int64_t> counts = trace->plan.Counts();
  ASSERT_EQ(counts.size(), reported.size());
  int64_t sum = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    EXPECT_LE(std::abs(counts[i] - reported[i]), 1) << "task " << i;
    sum += counts[i];
  }
  EXPECT_EQ(sum, 64);
  // Frozen: 22 reserved for p = 0.9, the rest to the unsolved task.
  EXPECT_EQ(counts, (std::vector<int64_t>{30, 22, 2, 2, 2, 2, 2, 2}));
  EXPECT_EQ(trace->fallback_pool, 30);
  EXPECT_EQ(trace->partition[0], Partition::kZeroRate);
  EXPECT_EQ(trace->partition[1], Partition::kInterior);
  EXPECT_EQ(trace->partition[2], Partition::kOneRate);
}

TEST(AllocateTest, AllSolvedGetFloor) {
  auto trace = Allocate(MakeRequest({1.0, 1.0, 1.0, 1.0}, 8, 2, 16, true));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->plan.Counts(), (std::vector<int64_t>(4, 2)));
}

TEST(AllocateTest, AllUnsolvedSplitEvenly) {
  auto trace = Allocate(MakeRequest({0.0, 0.0, 0.0, 0.0, 0.0}, 20, 2, 16,
                                    true));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->plan.Counts(), (std::vector<int64_t>(5, 4)));
}

TEST(AllocateTest, RemainderGoesToSmallestTaskIds) {
  AllocationRequest request = MakeRequest({0.0, 0.0, 0.0}, 11, 2, 16, true);
  request.tasks[0].task_id = "c";
  request.tasks[1].task_id = "a";
  request.tasks[2].task_id = "b";
  auto trace = Allocate(request);
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->plan.Counts(), (std::vector<int64_t>{3, 4, 4}));
}

TEST(AllocateTest, UnknownEstimatesGetFloor) {
  auto trace =
      Allocate(MakeRequest({std::nullopt, 0.5, std::nullopt}, 16, 2, 16, true));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->plan.Counts(), (std::vector<int64_t>{2, 12, 2}));
  EXPECT_EQ(trace->partition[0], Partition::kUnknown);
}

TEST(AllocateTest, CapsOverflowRoundRobin) {
  // Two unsolved tasks capped at 6 cannot absorb the 16 leftover rollouts.
  auto trace = Allocate(MakeRequest({0.0, 0.0, 1.0}, 18, 2, 6, true));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->plan.Counts(), (std::vector<int64_t>{6, 6, 6}));
}

TEST(AllocateTest, OversubscribedReservationsStayFeasible) {
  // Reservations for p = 0.1 (22 each) exceed the budget.
  auto trace = Allocate(MakeRequest({0.1, 0.1, 0.0, 0.0}, 16, 2, 64, true));
  ASSERT_TRUE(trace.ok());
  ExpectFeasible(*trace, MakeRequest({}, 16, 2, 64).config);
  EXPECT_EQ(trace->plan.Counts()[2], 2);
  EXPECT_EQ(trace->plan.Counts()[3], 2);
}

TEST(AllocateTest, WithoutZeroRateTasksInteriorKeepsReserves) {
  auto trace = Allocate(MakeRequest({0.5, 0.9, 1.0}, 40, 2, 64, true));
  ASSERT_TRUE(trace.ok());
  EXPECT_GE(trace->plan.Counts()[0], *HighProbBudget(0.5, 0.9));
  EXPECT_GE(trace->plan.Counts()[1], *HighProbBudget(0.9, 0.9));
  EXPECT_EQ(trace->plan.Counts()[2], 2);
  EXPECT_EQ(trace->plan.total, 40);
}

TEST(AllocateTest, ObjectiveSumsInteriorValues) {
  testing::Gen gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t m = gen.Int(1, 12);
    AllocationRequest request = gen.Request(m, 2, 32, gen.Int(2 * m, 32 * m),
                                            false);
    request.config.fallback_enabled = gen.Coin(0.5);
    auto trace = Allocate(request);
    ASSERT_TRUE(trace.ok()) << trace.status();
    double objective = 0.0;
    for (size_t i = 0; i < request.tasks.size(); ++i) {
      if (trace->partition[i] != Partition::kInterior) continue;
      objective += ValueOf(request.tasks[i], request.config.algorithm,
                           trace->plan.allocations[i].rollouts);
    }
    EXPECT_TRUE(WithinRelative(trace->objective, objective, 1e-12));
  }
}

TEST(BruteForceAllocateTest, SingleTaskAgrees) {
  const AllocationRequest request = MakeRequest({0.3}, 7, 1, 10);
  EXPECT_EQ(BruteForceAllocate(request)->plan, SolveKnapsack(request)->plan);
}

TEST(BruteForceAllocateTest, FiveTaskParityOverSeeds) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    testing::Gen gen(seed);
    const AllocationRequest request = gen.Request(5, 2, 8, 20, true);
    auto dp = SolveKnapsack(request);
    auto brute = BruteForceAllocate(request);
    ASSERT_TRUE(dp.ok() && brute.ok());
    EXPECT_EQ(dp->objective, brute->objective) << "seed " << seed;
    const Enumerated oracle = EnumerateOptimum(request);
    EXPECT_TRUE(WithinRelative(dp->objective, oracle.objective, 1e-12));
    EXPECT_EQ(dp->plan.Counts(), oracle.counts) << "seed " << seed;
  }
}

TEST(BruteForceAllocateTest, RejectsHugeSpaces) {
  testing::Gen gen(1);
  const AllocationRequest request = gen.Request(40, 2, 128, 2000, true);
  EXPECT_EQ(BruteForceAllocate(request).status().code(),
            absl::StatusCode::kResourceExhausted);
}

TEST(SolveKnapsackPropertyTest, OracleEquivalenceOnSmallInstances) {
  testing::Gen gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int64_t m = gen.Int(1, 5);
    const int64_t n_low = gen.Int(1, 4);
    const int64_t n_up = gen.Int(n_low, 10);
    const int64_t lo = m * n_low;
    const int64_t hi = std::min<int64_t>(24, m * n_up);
    if (lo > hi) continue;
    const AllocationRequest request =
        gen.Request(m, n_low, n_up, gen.Int(lo, hi), gen.Coin(0.7));
    auto dp = SolveKnapsack(request);
    ASSERT_TRUE(dp.ok()) << dp.status();
    const Enumerated oracle = EnumerateOptimum(request);
    EXPECT_TRUE(WithinRelative(dp->objective, oracle.objective, 1e-12))
        << "trial " << trial;
    EXPECT_EQ(dp->plan.Counts(), oracle.counts) << "trial " << trial;
  }
}

TEST(SolveKnapsackPropertyTest, FeasibilityFuzz) {
  testing::Gen gen(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int64_t m = gen.Int(1, 40);
    const int64_t n_low = gen.Int(1, 4);
    const int64_t n_up = n_low + gen.Int(0, 30);
    const int64_t n_total = gen.Int(m * n_low, m * n_up);
    AllocationRequest request = gen.Request(m, n_low, n_up, n_total, false);
    request.config.alpha = gen.Real(0.5, 0.99);
    request.config.fallback_enabled = gen.Coin(0.5);
    auto trace = Allocate(request);
    ASSERT_TRUE(trace.ok()) << trace.status();
    ExpectFeasible(*trace, request.config);
  }
}

TEST(SolveKnapsackPropertyTest, ObjectiveMonotoneInBudget) {
  testing::Gen gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int64_t m = gen.Int(2, 10);
    AllocationRequest request = gen.Request(m, 2, 16, 2 * m, false);
    double previous = -1.0;
    for (int64_t total = 2 * m; total <= 16 * m; ++total) {
      request.config.n_total = total;
      const double objective = SolveKnapsack(request)->objective;
      EXPECT_GE(objective, previous - 1e-15);
      previous = objective;
    }
  }
}

TEST(SolveKnapsackPropertyTest, Deterministic) {
  testing::Gen gen(8);
  const AllocationRequest request = gen.Request(64, 2, 64, 512, false);
  auto a = Allocate(request);
  auto b = Allocate(request);
  EXPECT_EQ(a->plan, b->plan);
  EXPECT_EQ(a->partition, b->partition);
  EXPECT_EQ(a->objective, b->objective);
}

std::vector<LevelValues> RandomTables(testing::Gen& gen, int64_t m,
                                      bool integral) {
  std::vector<LevelValues> items(m);
  for (LevelValues& item : items) {
    item.min_level = gen.Int(0, 3);
    const int64_t range = gen.Int(1, 6);
    for (int64_t k = 0; k < range; ++k) {
      item.values.push_back(integral ? static_cast<double>(gen.Int(0, 3))
                                     : gen.Real(0.0, 1.0));
    }
  }
  return items;
}

TEST(MaximizeSeparableTest, MatchesBruteForceIncludingTies) {
  testing::Gen gen(17);
  for (int trial = 0; trial < 500; ++trial) {
    const bool integral = gen.Coin(0.5);
    std::vector<LevelValues> items = RandomTables(gen, gen.Int(1, 5), integral);
    int64_t lo = 0;
    int64_t hi = 0;
    for (const LevelValues& item : items) {
      lo += item.min_level;
      hi += item.max_level();
    }
    const int64_t total = gen.Int(lo, hi);
    auto dp = MaximizeSeparable(items, total);
    auto brute = BruteForceSeparable(items, total);
    ASSERT_TRUE(dp.ok() && brute.ok());
    EXPECT_EQ(dp->levels, brute->levels) << "trial " << trial;
    EXPECT_TRUE(WithinRelative(dp->objective, brute->objective, 1e-12));
  }
}

TEST(MaximizeSeparableTest, InfeasibleTotal) {
  std::vector<LevelValues> items = {{2, {0.0, 1.0}}, {1, {0.5}}};
  EXPECT_FALSE(MaximizeSeparable(items, 2).ok());
  EXPECT_FALSE(MaximizeSeparable(items, 5).ok());
  EXPECT_TRUE(MaximizeSeparable(items, 4).ok());
}

TEST(MaximizeSeparableTest, ScaleInvariantArgmax) {
  testing::Gen gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    const AllocationRequest request =
        gen.Request(gen.Int(2, 20), 2, 24, 0, true);
    const int64_t m = static_cast<int64_t>(request.tasks.size());
    std::vector<LevelValues> items;
    for (const AllocationTask& task : request.tasks) {
      LevelValues item{2, {}};
      for (int64_t n = 2; n <= 24; ++n) {
        item.values.push_back(ValueOf(task, Algorithm::kGrpo, n));
      }
      items.push_back(std::move(item));
    }
    const int64_t total = gen.Int(2 * m, 24 * m);
    const std::vector<int64_t> base = MaximizeSeparable(items, total)->levels;
    for (double scale : {0.25, 3.0, 1024.0, 1e-3}) {
      std::vector<LevelValues> scaled = items;
      for (LevelValues& item : scaled) {
        for (double& v : item.values) v *= scale;
      }
      EXPECT_EQ(MaximizeSeparable(scaled, total)->levels, base)
          << "trial " << trial << " scale " << scale;
    }
  }
}

TEST(UniformAllocateTest, Totals) {
  std::vector<AllocationTask> tasks(256);
  for (size_t i = 0; i < tasks.size(); ++i) {
    tasks[i].task_id = std::to_string(i);
  }
  EXPECT_EQ(UniformAllocate(tasks, 8).total, 2048);
  EXPECT_EQ(UniformAllocate(tasks, 4).total, 1024);
  EXPECT_EQ(UniformAllocate(tasks, 16).total, 4096);
  const BudgetPlan one = UniformAllocate(std::span(tasks).first(1), 1);
  EXPECT_EQ(one.Counts(), (std::vector<int64_t>{1}));
}

TEST(FilterAllocateTest, DropsExtremes) {
  const AllocationRequest request = MakeRequest({0.0, 0.5, 1.0}, 0, 1, 1);
  const BudgetPlan plan = FilterAllocate(request.tasks, 8);
  EXPECT_EQ(plan.Counts(), (std::vector<int64_t>{0, 8, 0}));
  EXPECT_EQ(plan.total, 8);
  EXPECT_EQ(plan.requested_total, 24);
  EXPECT_FALSE(plan.exact_budget);

  const AllocationRequest table = MakeRequest(kFallbackRates, 0, 1, 1);
  EXPECT_EQ(FilterAllocate(table.tasks, 8).Counts(),
            (std::vector<int64_t>{0, 8, 0, 0, 0, 0, 0, 0}));
}

TEST(FilterAllocateTest, InteriorMatchesUniform) {
  const AllocationRequest request = MakeRequest({0.1, 0.5, 0.7}, 0, 1, 1);
  EXPECT_EQ(FilterAllocate(request.tasks, 8).Counts(),
            UniformAllocate(request.tasks, 8).Counts());
}

}  // namespace
}  // namespace knapsack_rl
