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

// Closed-form value and budget theory for binary-reward tasks.
//
// A task with success rate p that receives n rollouts produces a learning
// signal only when its group is mixed (contains a success and a failure,
// for GRPO/RLOO). The value of the pair (task, n) is
//
//   Value(n, p) = ProbNonZeroGradient(n, p) * InfoGain(p),
//   InfoGain(p) = p * (1 - p)^2,
//
// where InfoGain is the first-order increase of the success probability after
// one softmax policy-gradient step with unit learning rate and unit advantage.
// InfoGainExact() keeps the second-order cross term of that step and serves
// as the oracle for the approximation.

#ifndef KNAPSACK_RL_VALUE_MODEL_H_
#define KNAPSACK_RL_VALUE_MODEL_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl {

// A categorical policy over K actions together with the index of the
// correct action.
class SoftmaxState {
 public:
  // Probabilities must be nonnegative and sum to 1 within 1e-9.
  static absl::StatusOr<SoftmaxState> Create(std::vector<double> probs,
                                             int target);
  // p_y at `target`, the rest of the mass spread evenly over K - 1 actions.
  static absl::StatusOr<SoftmaxState> UniformResidual(int num_actions,
                                                      double target_prob);

  const std::vector<double>& probs() const { return probs_; }
  int target() const { return target_; }
  double target_prob() const { return probs_[target_]; }

 private:
  SoftmaxState(std::vector<double> probs, int target)
      : probs_(std::move(probs)), target_(target) {}

  std::vector<double> probs_;
  int target_;
};

// p * (1 - p)^2. Requires 0 <= p <= 1.
double InfoGainApprox(double p);

// p_y (1 - p_y)^2 + p_y * sum_{k != y} p_k^2: the exact one-step change of
// p_y under the softmax update z_k += 1[k == y] - p_k.
double InfoGainExact(const SoftmaxState& state);

// Probability that n rollouts yield a nonzero gradient. `greedy_prob` is
// required for ReMax and ignored otherwise.
absl::StatusOr<double> ProbNonZeroGradient(
    Algorithm algorithm, int64_t n, double p,
    std::optional<double> greedy_prob = std::nullopt);

// ProbNonZeroGradient * InfoGainApprox.
absl::StatusOr<double> TaskValue(Algorithm algorithm, int64_t n, double p,
                                 std::optional<double> greedy_prob =
                                     std::nullopt);

// Expected number of rollouts until the group first becomes mixed:
// 1/p + 1/(1-p) - 1. Fails for p in {0, 1}.
absl::StatusOr<double> ExpectedFirstNonZero(double p);

// Smallest n with max(p, 1-p)^n <= 1 - alpha, i.e.
// ceil(ln(1 - alpha) / ln(max(p, 1 - p))), at least 1. Fails for p in {0, 1}.
absl::StatusOr<int64_t> HighProbBudget(double p, double alpha);

struct BudgetCurvePoint {
  double p = 0.0;
  int64_t n = 0;
  double value = 0.0;
};

// Value surface over the cartesian product of `rates` and `budgets`, row-major
// in `rates`.
absl::StatusOr<std::vector<BudgetCurvePoint>> ValueSurface(
    Algorithm algorithm, const std::vector<double>& rates,
    const std::vector<int64_t>& budgets,
    std::optional<double> greedy_prob = std::nullopt);

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_VALUE_MODEL_H_
