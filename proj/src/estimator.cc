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

#include "knapsack_rl/estimator.h"

#include "absl/strings/str_cat.h"
#include "knapsack_rl/format.h"

namespace knapsack_rl {

SuccessRateEstimator::SuccessRateEstimator(std::vector<std::string> task_ids,
                                           double smoothing)
    : task_ids_(std::move(task_ids)),
      smoothing_(smoothing),
      accumulators_(task_ids_.size()),
      frozen_(task_ids_.size()),
      frozen_epoch_(task_ids_.size()),
      frozen_trials_(task_ids_.size(), 0),
      history_(task_ids_.size()) {
  KRL_CHECK(smoothing >= 0.0 && smoothing < 1.0,
            "smoothing must lie in [0, 1)");
  index_.reserve(task_ids_.size());
  for (size_t i = 0; i < task_ids_.size(); ++i) {
    const bool inserted = index_.emplace(task_ids_[i], i).second;
    KRL_CHECK(inserted, "duplicate task id");
  }
}

absl::StatusOr<size_t> SuccessRateEstimator::IndexOf(
    std::string_view task_id) const {
  const auto it = index_.find(std::string(task_id));
  if (it == index_.end()) {
    return absl::NotFoundError(absl::StrCat("unknown task_id '", std::string(task_id), "'"));
  }
  return it->second;
}

absl::Status SuccessRateEstimator::Record(std::string_view task_id,
                                          const GroupOutcome& outcome) {
  return Record(task_id, outcome.successes(), outcome.size());
}

absl::Status SuccessRateEstimator::Record(std::string_view task_id,
                                          int64_t successes, int64_t trials) {
  absl::StatusOr<size_t> index = IndexOf(task_id);
  if (!index.ok()) return index.status();
  if (successes < 0 || successes > trials) {
    return absl::InvalidArgumentError(absl::StrCat(
        "invalid outcome: ", successes, " successes in ", trials, " trials"));
  }
  RecordAt(*index, successes, trials);
  return absl::OkStatus();
}

void SuccessRateEstimator::RecordAt(size_t index, int64_t successes,
                                    int64_t trials) {
  accumulators_[index].successes += successes;
  accumulators_[index].trials += trials;
}

void SuccessRateEstimator::Rollover() {
  for (size_t i = 0; i < accumulators_.size(); ++i) {
    EpochCounts& counts = accumulators_[i];
    history_[i].push_back(counts);
    if (counts.trials > 0) {
      const double fraction = static_cast<double>(counts.successes) /
                              static_cast<double>(counts.trials);
      if (smoothing_ > 0.0 && frozen_[i].has_value()) {
        frozen_[i] = smoothing_ * *frozen_[i] + (1.0 - smoothing_) * fraction;
      } else {
        frozen_[i] = fraction;
      }
      frozen_epoch_[i] = epoch_;
      frozen_trials_[i] = counts.trials;
    }
    counts = EpochCounts{};
  }
  ++epoch_;
}

absl::StatusOr<std::optional<double>> SuccessRateEstimator::Estimate(
    std::string_view task_id) const {
  absl::StatusOr<size_t> index = IndexOf(task_id);
  if (!index.ok()) return index.status();
  return frozen_[*index];
}

absl::StatusOr<EpochCounts> SuccessRateEstimator::Accumulator(
    std::string_view task_id) const {
  absl::StatusOr<size_t> index = IndexOf(task_id);
  if (!index.ok()) return index.status();
  return accumulators_[*index];
}

void SuccessRateEstimator::ExportSnapshotCsv(std::ostream& out) const {
  out << "task_id,epoch,frozen_p,trials\n";
  for (size_t i = 0; i < task_ids_.size(); ++i) {
    out << CsvField(task_ids_[i]) << ',';
    if (frozen_epoch_[i].has_value()) {
      out << *frozen_epoch_[i];
    } else {
      out << '?';
    }
    out << ',';
    if (frozen_[i].has_value()) {
      out << FormatNumber(*frozen_[i]);
    } else {
      out << '?';
    }
    out << ',' << frozen_trials_[i] << '\n';
  }
}

}  // namespace knapsack_rl
