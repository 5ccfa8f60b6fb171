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

#ifndef KNAPSACK_RL_ESTIMATOR_H_
#define KNAPSACK_RL_ESTIMATOR_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "knapsack_rl/metrics.h"
#include "knapsack_rl/types.h"

namespace knapsack_rl {

// Epoch-delayed success-rate estimates.
//
// Outcomes recorded during an epoch are pooled per task; estimates only
// change at Rollover(), when each sampled task's estimate becomes its pooled
// success fraction for the finished epoch. Tasks that were not sampled keep
// their previous estimate (or stay unknown).
//
// Not thread-safe: one writer per instance.
class SuccessRateEstimator {
 public:
  // `smoothing` in [0, 1): new estimate = smoothing * old + (1 - smoothing) *
  // epoch fraction when an old estimate exists. 0 disables smoothing.
  explicit SuccessRateEstimator(std::vector<std::string> task_ids,
                                double smoothing = 0.0);

  absl::Status Record(std::string_view task_id, const GroupOutcome& outcome);
  absl::Status Record(std::string_view task_id, int64_t successes,
                      int64_t trials);
  // Index-based variants for callers that already hold the task position.
  void RecordAt(size_t index, int64_t successes, int64_t trials);

  void Rollover();

  absl::StatusOr<std::optional<double>> Estimate(
      std::string_view task_id) const;
  const std::optional<double>& EstimateAt(size_t index) const {
    return frozen_[index];
  }

  absl::StatusOr<EpochCounts> Accumulator(std::string_view task_id) const;
  // Per-epoch pooled counts of every finished epoch, oldest first.
  const std::vector<EpochCounts>& History(size_t index) const {
    return history_[index];
  }

  int64_t current_epoch() const { return epoch_; }
  size_t size() const { return task_ids_.size(); }
  const std::vector<std::string>& task_ids() const { return task_ids_; }

  // CSV with header `task_id,epoch,frozen_p,trials`. `epoch` is the index of
  // the epoch the estimate was frozen from; `trials` the trials behind it.
  // Unknown estimates are written as `?`.
  void ExportSnapshotCsv(std::ostream& out) const;

 private:
  absl::StatusOr<size_t> IndexOf(std::string_view task_id) const;

  std::vector<std::string> task_ids_;
  std::unordered_map<std::string, size_t> index_;
  double smoothing_;
  int64_t epoch_ = 0;
  std::vector<EpochCounts> accumulators_;
  std::vector<std::optional<double>> frozen_;
  std::vector<std::optional<int64_t>> frozen_epoch_;
  std::vector<int64_t> frozen_trials_;
  std::vector<std::vector<EpochCounts>> history_;
};

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_ESTIMATOR_H_
