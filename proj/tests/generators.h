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

// Seeded input generators for property tests.

#ifndef KNAPSACK_RL_TESTS_GENERATORS_H_
#define KNAPSACK_RL_TESTS_GENERATORS_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "knapsack_rl/allocator.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl::testing {

class Gen {
 public:
  explicit Gen(uint64_t seed) : rng_(seed) {}

  int64_t Int(int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng_);
  }
  double Real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool Coin(double p_true) { return std::bernoulli_distribution(p_true)(rng_); }

  // Mix of extremes, unknowns, coarse empirical fractions and arbitrary
  // interior rates.
  std::optional<double> Estimate() {
    switch (Int(0, 5)) {
      case 0:
        return 0.0;
      case 1:
        return 1.0;
      case 2:
        return std::nullopt;
      case 3:
        return static_cast<double>(Int(1, 7)) / 8.0;
      default:
        return Real(0.001, 0.999);
    }
  }

  // Interior rate only.
  double InteriorRate() {
    return Coin(0.5) ? static_cast<double>(Int(1, 15)) / 16.0
                     : Real(0.001, 0.999);
  }

  std::vector<uint8_t> Rewards(int64_t n, double p) {
    std::bernoulli_distribution draw(p);
    std::vector<uint8_t> rewards(n);
    for (auto& r : rewards) r = draw(rng_) ? 1 : 0;
    return rewards;
  }

  // Feasible request with `m` tasks; est_p drawn by `Estimate` unless
  // `interior_only`.
  AllocationRequest Request(int64_t m, int64_t n_low, int64_t n_up,
                            int64_t n_total, bool interior_only) {
    AllocationRequest request;
    request.config.n_low = n_low;
    request.config.n_up = n_up;
    request.config.n_total = n_total;
    for (int64_t i = 0; i < m; ++i) {
      AllocationTask task;
      task.task_id = "q" + std::to_string(i);
      task.est_p =
          interior_only ? std::optional<double>(InteriorRate()) : Estimate();
      request.tasks.push_back(std::move(task));
    }
    return request;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace knapsack_rl::testing

#endif  // KNAPSACK_RL_TESTS_GENERATORS_H_
