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

#include "knapsack_rl/value_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"

namespace knapsack_rl {
namespace {

// Guards the ceiling in HighProbBudget against ratios that are integral up to
// rounding noise.
constexpr double kCeilSlack = 1e-9;

absl::Status CheckRate(double p) {
  if (!IsProbability(p)) {
    return absl::InvalidArgumentError(
        absl::StrCat("success rate ", p, " is outside [0, 1]"));
  }
  return absl::OkStatus();
}

absl::Status CheckInteriorRate(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "success rate ", p,
        " has no finite budget; only rates in (0, 1) are defined"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<SoftmaxState> SoftmaxState::Create(std::vector<double> probs,
                                                  int target) {
  if (probs.empty()) {
    return absl::InvalidArgumentError("softmax state needs at least 1 action");
  }
  if (target < 0 || target >= static_cast<int>(probs.size())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "target ", target, " out of range for ", probs.size(), " actions"));
  }
  for (double p : probs) {
    if (!(p >= 0.0)) {
      return absl::InvalidArgumentError("probabilities must be nonnegative");
    }
  }
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        absl::StrCat("probabilities sum to ", sum, ", not 1"));
  }
  return SoftmaxState(std::move(probs), target);
}

absl::StatusOr<SoftmaxState> SoftmaxState::UniformResidual(int num_actions,
                                                           double target_prob) {
  if (num_actions < 2) {
    return absl::InvalidArgumentError("uniform residual needs K >= 2");
  }
  if (auto s = CheckRate(target_prob); !s.ok()) return s;
  std::vector<double> probs(num_actions,
                            (1.0 - target_prob) / (num_actions - 1));
  probs[0] = target_prob;
  return Create(std::move(probs), 0);
}

double InfoGainApprox(double p) {
  KRL_CHECK(IsProbability(p), "success rate must lie in [0, 1]");
  const double q = 1.0 - p;
  return p * q * q;
}

double InfoGainExact(const SoftmaxState& state) {
  const double p_y = state.target_prob();
  double cross = 0.0;
  for (int k = 0; k < static_cast<int>(state.probs().size()); ++k) {
    if (k == state.target()) continue;
    cross += state.probs()[k] * state.probs()[k];
  }
  const double q = 1.0 - p_y;
  return p_y * q * q + p_y * cross;
}

absl::StatusOr<double> ProbNonZeroGradient(Algorithm algorithm, int64_t n,
                                           double p,
                                           std::optional<double> greedy_prob) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("rollout count ", n, " must be at least 1"));
  }
  if (auto s = CheckRate(p); !s.ok()) return s;
  const double count = static_cast<double>(n);
  switch (algorithm) {
    case Algorithm::kGrpo:
    case Algorithm::kRloo:
      return 1.0 - std::pow(p, count) - std::pow(1.0 - p, count);
    case Algorithm::kReinforce:
      return 1.0 - std::pow(1.0 - p, count);
    case Algorithm::kRemax:
      if (!greedy_prob.has_value()) {
        return absl::InvalidArgumentError(
            "ReMax requires the greedy-response probability");
      }
      if (!IsProbability(*greedy_prob)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "greedy probability ", *greedy_prob, " is outside [0, 1]"));
      }
      return 1.0 - std::pow(*greedy_prob, count);
  }
  return absl::InvalidArgumentError("unknown algorithm");
}

absl::StatusOr<double> TaskValue(Algorithm algorithm, int64_t n, double p,
                                 std::optional<double> greedy_prob) {
  absl::StatusOr<double> nonzero =
      ProbNonZeroGradient(algorithm, n, p, greedy_prob);
  if (!nonzero.ok()) return nonzero.status();
  return *nonzero * InfoGainApprox(p);
}

absl::StatusOr<double> ExpectedFirstNonZero(double p) {
  if (auto s = CheckInteriorRate(p); !s.ok()) return s;
  return 1.0 / p + 1.0 / (1.0 - p) - 1.0;
}

absl::StatusOr<int64_t> HighProbBudget(double p, double alpha) {
  if (auto s = CheckInteriorRate(p); !s.ok()) return s;
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("confidence ", alpha, " must lie in (0, 1)"));
  }
  const double ratio = std::log1p(-alpha) / std::log(std::max(p, 1.0 - p));
  const auto budget = static_cast<int64_t>(std::ceil(ratio - kCeilSlack));
  return std::max<int64_t>(budget, 1);
}

absl::StatusOr<std::vector<BudgetCurvePoint>> ValueSurface(
    Algorithm algorithm, const std::vector<double>& rates,
    const std::vector<int64_t>& budgets, std::optional<double> greedy_prob) {
  std::vector<BudgetCurvePoint> surface;
  surface.reserve(rates.size() * budgets.size());
  for (double p : rates) {
    for (int64_t n : budgets) {
      absl::StatusOr<double> value = TaskValue(algorithm, n, p, greedy_prob);
      if (!value.ok()) return value.status();
      surface.push_back({p, n, *value});
    }
  }
  return surface;
}

}  // namespace knapsack_rl
