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

// Closed-loop synthetic training on Bernoulli tasks.
//
// Each task has a latent success rate. Every iteration a minibatch of tasks
// is drawn (epochs are shuffled passes over the dataset; a trailing partial
// minibatch is dropped), rollouts are allocated by the chosen policy,
// rewards are sampled, and every task whose group is mixed moves its latent
// rate by eta * p * (1 - p)^2. Knapsack policies allocate with the estimates
// frozen at the previous epoch boundary; the first epoch is homogeneous.

#ifndef KNAPSACK_RL_SIMULATOR_H_
#define KNAPSACK_RL_SIMULATOR_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "knapsack_rl/metrics.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl {

enum class SimPolicy { kUniform, kFilter, kKnapsack, kKnapsackNoFallback };

std::string_view SimPolicyName(SimPolicy policy);
absl::StatusOr<SimPolicy> ParseSimPolicy(std::string_view name);

enum class LatentInit {
  // Point mass at 0 with weight unsolvable_fraction, Beta(a, b) otherwise.
  kBetaMixture,
  // Point mass at 0 with weight unsolvable_fraction, Uniform(0, 1) otherwise.
  kUniformMixture,
  // Every task at latent_constant.
  kConstant,
};

std::string_view LatentInitName(LatentInit init);
absl::StatusOr<LatentInit> ParseLatentInit(std::string_view name);

struct SimConfig {
  int64_t dataset_size = 2000;
  int64_t minibatch = 256;
  int64_t iterations = 300;
  int64_t n_total = 2048;
  SimPolicy policy = SimPolicy::kKnapsack;
  double eta_sim = 0.3;
  LatentInit latent_init = LatentInit::kBetaMixture;
  double beta_a = 0.4;
  double beta_b = 1.6;
  double latent_constant = 0.5;
  double unsolvable_fraction = 0.15;
  uint64_t seed = 0;
  // Allocation knobs for the knapsack policies.
  int64_t n_low = 2;
  int64_t n_up = 128;
  double alpha = 0.9;
  Algorithm algorithm = Algorithm::kGrpo;
  // When nonempty, replaces latent_init; must hold dataset_size rates.
  std::vector<double> initial_latent;
};

absl::Status ValidateSimConfig(const SimConfig& config);

std::string SimTaskId(int64_t index);

// n Bernoulli(latent_p) rewards. Fails when the task has no latent rate.
absl::StatusOr<GroupOutcome> SampleRewards(const TaskRecord& task, int64_t n,
                                           std::mt19937_64& rng);

// Moves latent_p by eta * p * (1 - p)^2 (capped at 1) when `outcome` is
// mixed; otherwise returns the task unchanged.
TaskRecord ApplyUpdate(TaskRecord task, const GroupOutcome& outcome,
                       double eta_sim);

struct EpochSnapshot {
  int64_t epoch = 0;
  // False for the trailing partial epoch at the end of a run.
  bool complete = true;
  // Estimator value after this epoch (carried forward for unsampled tasks).
  std::vector<std::optional<double>> empirical;
  std::vector<double> latent;
};

using TransitionCounts =
    std::array<std::array<int64_t, kNumStatusCategories>, kNumStatusCategories>;

enum class StatusBinning { kEmpirical, kLatent };

struct SimReport {
  SimConfig config;
  std::vector<std::string> task_ids;
  std::vector<IterationMetrics> metrics;
  // Per iteration: the budget asked for and the rollouts actually sampled.
  std::vector<int64_t> planned_rollouts;
  std::vector<int64_t> executed_rollouts;
  std::vector<EpochSnapshot> snapshots;
  std::vector<double> initial_latent;
  std::vector<double> final_latent;
  // First to last snapshot, empirical bins.
  TransitionCounts transition_matrix{};
  // rollouts per (task, iteration) -> frequency.
  std::map<int64_t, int64_t> allocation_histogram;
  std::vector<bool> ever_solved;

  double MeanEffectiveRatio() const;
  // Empirical bins of the last snapshot; tasks never sampled are skipped.
  StatusCounts FinalStatusDistribution() const;
  int64_t MaxAllocation() const;
};

absl::StatusOr<SimReport> RunSimulation(const SimConfig& config);

// Counts of tasks moving from their bin at `start_epoch` to their bin at
// `end_epoch` (snapshot indices). With empirical binning, tasks without an
// estimate at either end are skipped.
absl::StatusOr<TransitionCounts> TransitionMatrix(
    const SimReport& report, size_t start_epoch, size_t end_epoch,
    StatusBinning binning = StatusBinning::kEmpirical);

// Report serializers. Formats are stable; every file starts with a header.
void WriteMetricsCsv(const SimReport& report, std::ostream& out);
void WriteTransitionCsv(const TransitionCounts& counts, std::ostream& out);
void WriteHistogramCsv(const SimReport& report, std::ostream& out);
void WriteSnapshotsJsonl(const SimReport& report, std::ostream& out);

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_SIMULATOR_H_
