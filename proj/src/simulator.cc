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

#include "knapsack_rl/simulator.h"

#include <algorithm>
#include <numeric>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "knapsack_rl/allocator.h"
#include "knapsack_rl/estimator.h"
#include "knapsack_rl/format.h"

namespace knapsack_rl {
namespace {

// Independent generator streams so that policies run with the same seed see
// the same initial population and the same minibatch order.
enum Stream : uint64_t { kInitStream = 1, kOrderStream = 2, kRewardStream = 3 };

std::mt19937_64 MakeStream(uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double SampleBeta(double a, double b, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y == 0.0) return 0.0;
  return x / (x + y);
}

std::vector<double> InitialLatent(const SimConfig& config,
                                  std::mt19937_64& rng) {
  if (!config.initial_latent.empty()) return config.initial_latent;
  std::vector<double> latent(config.dataset_size);
  std::bernoulli_distribution unsolvable(config.unsolvable_fraction);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (double& p : latent) {
    switch (config.latent_init) {
      case LatentInit::kConstant:
        p = config.latent_constant;
        break;
      case LatentInit::kBetaMixture:
        p = unsolvable(rng) ? 0.0 : SampleBeta(config.beta_a, config.beta_b, rng);
        break;
      case LatentInit::kUniformMixture:
        p = unsolvable(rng) ? 0.0 : uniform(rng);
        break;
    }
  }
  return latent;
}

// n_total spread as evenly as possible; the first tasks absorb the remainder.
std::vector<int64_t> HomogeneousCounts(int64_t m, int64_t n_total) {
  std::vector<int64_t> counts(m, n_total / m);
  for (int64_t i = 0; i < n_total % m; ++i) ++counts[i];
  return counts;
}

StatusCategory BinOf(const EpochSnapshot& snapshot, size_t task,
                     StatusBinning binning, bool* defined) {
  if (binning == StatusBinning::kLatent) {
    *defined = true;
    return CategorizeStatus(snapshot.latent[task]);
  }
  *defined = snapshot.empirical[task].has_value();
  return *defined ? CategorizeStatus(*snapshot.empirical[task])
                  : StatusCategory::kExtremelyHard;
}

}  // namespace

std::string_view SimPolicyName(SimPolicy policy) {
  switch (policy) {
    case SimPolicy::kUniform:
      return "uniform";
    case SimPolicy::kFilter:
      return "filter";
    case SimPolicy::kKnapsack:
      return "knapsack";
    case SimPolicy::kKnapsackNoFallback:
      return "knapsack-no-fallback";
  }
  return "unknown";
}

absl::StatusOr<SimPolicy> ParseSimPolicy(std::string_view name) {
  const std::string lower = absl::AsciiStrToLower(std::string(name));
  for (SimPolicy policy : {SimPolicy::kUniform, SimPolicy::kFilter,
                           SimPolicy::kKnapsack,
                           SimPolicy::kKnapsackNoFallback}) {
    if (lower == SimPolicyName(policy)) return policy;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown policy '", std::string(name),
      "' (expected uniform, filter, knapsack or knapsack-no-fallback)"));
}

std::string_view LatentInitName(LatentInit init) {
  switch (init) {
    case LatentInit::kBetaMixture:
      return "beta";
    case LatentInit::kUniformMixture:
      return "uniform";
    case LatentInit::kConstant:
      return "constant";
  }
  return "unknown";
}

absl::StatusOr<LatentInit> ParseLatentInit(std::string_view name) {
  const std::string lower = absl::AsciiStrToLower(std::string(name));
  for (LatentInit init : {LatentInit::kBetaMixture, LatentInit::kUniformMixture,
                          LatentInit::kConstant}) {
    if (lower == LatentInitName(init)) return init;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown latent_init '", std::string(name), "' (expected beta, uniform or constant)"));
}

absl::Status ValidateSimConfig(const SimConfig& config) {
  if (config.dataset_size < 1 || config.minibatch < 1 ||
      config.iterations < 0 || config.n_total < 1) {
    return absl::InvalidArgumentError(
        "dataset_size, minibatch and n_total must be >= 1; iterations >= 0");
  }
  if (config.minibatch > config.dataset_size) {
    return absl::InvalidArgumentError(
        absl::StrCat("minibatch ", config.minibatch, " exceeds dataset_size ",
                     config.dataset_size));
  }
  if (config.n_total < config.minibatch) {
    return absl::InvalidArgumentError(absl::StrCat(
        "n_total ", config.n_total, " gives some task no rollout (minibatch ",
        config.minibatch, ")"));
  }
  if (!(config.eta_sim >= 0.0)) {
    return absl::InvalidArgumentError("eta_sim must be nonnegative");
  }
  if (!IsProbability(config.unsolvable_fraction)) {
    return absl::InvalidArgumentError("unsolvable_fraction must lie in [0, 1]");
  }
  if (!(config.beta_a > 0.0 && config.beta_b > 0.0)) {
    return absl::InvalidArgumentError("beta parameters must be positive");
  }
  if (!IsProbability(config.latent_constant)) {
    return absl::InvalidArgumentError("latent_constant must lie in [0, 1]");
  }
  if (!config.initial_latent.empty()) {
    if (static_cast<int64_t>(config.initial_latent.size()) !=
        config.dataset_size) {
      return absl::InvalidArgumentError(
          "initial_latent must hold dataset_size rates");
    }
    for (double p : config.initial_latent) {
      if (!IsProbability(p)) {
        return absl::InvalidArgumentError("initial_latent outside [0, 1]");
      }
    }
  }
  if (config.policy == SimPolicy::kKnapsack ||
      config.policy == SimPolicy::kKnapsackNoFallback) {
    if (config.algorithm == Algorithm::kRemax) {
      return absl::InvalidArgumentError(
          "the simulator has no greedy-response model; ReMax is unsupported");
    }
    AllocationConfig allocation;
    allocation.n_total = config.n_total;
    allocation.n_low = config.n_low;
    allocation.n_up = config.n_up;
    allocation.alpha = config.alpha;
    if (auto violation = ValidateConfig(allocation, config.minibatch)) {
      return absl::InvalidArgumentError(violation->message);
    }
  }
  return absl::OkStatus();
}

std::string SimTaskId(int64_t index) { return absl::StrFormat("t%05d", index); }

absl::StatusOr<GroupOutcome> SampleRewards(const TaskRecord& task, int64_t n,
                                           std::mt19937_64& rng) {
  if (!task.latent_p.has_value()) {
    return absl::FailedPreconditionError(
        absl::StrCat("task ", task.task_id, " has no latent success rate"));
  }
  if (n < 1) return absl::InvalidArgumentError("n must be at least 1");
  std::bernoulli_distribution draw(*task.latent_p);
  std::vector<uint8_t> rewards(n);
  for (uint8_t& r : rewards) r = draw(rng) ? 1 : 0;
  return GroupAdvantages(std::move(rewards), task.task_id);
}

TaskRecord ApplyUpdate(TaskRecord task, const GroupOutcome& outcome,
                       double eta_sim) {
  KRL_CHECK(outcome.task_id.empty() || outcome.task_id == task.task_id,
            "outcome belongs to a different task");
  if (!outcome.effective || !task.latent_p.has_value()) return task;
  const double p = *task.latent_p;
  task.latent_p = std::min(1.0, p + eta_sim * p * (1.0 - p) * (1.0 - p));
  return task;
}

double SimReport::MeanEffectiveRatio() const {
  if (metrics.empty()) return 0.0;
  double sum = 0.0;
  for (const IterationMetrics& row : metrics) {
    sum += row.effective_gradient_ratio;
  }
  return sum / static_cast<double>(metrics.size());
}

StatusCounts SimReport::FinalStatusDistribution() const {
  StatusCounts counts{};
  if (snapshots.empty()) return counts;
  for (const std::optional<double>& p : snapshots.back().empirical) {
    if (p.has_value()) ++counts[static_cast<int>(CategorizeStatus(*p))];
  }
  return counts;
}

int64_t SimReport::MaxAllocation() const {
  return allocation_histogram.empty() ? 0
                                      : allocation_histogram.rbegin()->first;
}

absl::StatusOr<SimReport> RunSimulation(const SimConfig& config) {
  if (auto s = ValidateSimConfig(config); !s.ok()) return s;

  std::mt19937_64 init_rng = MakeStream(config.seed, kInitStream);
  std::mt19937_64 order_rng = MakeStream(config.seed, kOrderStream);
  std::mt19937_64 reward_rng = MakeStream(config.seed, kRewardStream);

  const int64_t d = config.dataset_size;
  const int64_t m = config.minibatch;
  SimReport report;
  report.config = config;
  report.task_ids.reserve(d);
  for (int64_t i = 0; i < d; ++i) report.task_ids.push_back(SimTaskId(i));
  std::vector<TaskRecord> tasks(d);
  {
    const std::vector<double> latent = InitialLatent(config, init_rng);
    for (int64_t i = 0; i < d; ++i) {
      tasks[i].task_id = report.task_ids[i];
      tasks[i].latent_p = latent[i];
    }
    report.initial_latent = latent;
  }
  report.ever_solved.assign(d, false);

  SuccessRateEstimator estimator(report.task_ids);
  AllocationConfig allocation;
  allocation.n_total = config.n_total;
  allocation.n_low = config.n_low;
  allocation.n_up = config.n_up;
  allocation.alpha = config.alpha;
  allocation.algorithm = config.algorithm;
  allocation.fallback_enabled = config.policy == SimPolicy::kKnapsack;

  std::vector<size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), order_rng);
  const int64_t batches_per_epoch = d / m;
  int64_t batch_in_epoch = 0;
  bool epoch_has_data = false;

  const auto take_snapshot = [&](bool complete) {
    estimator.Rollover();
    EpochSnapshot snapshot;
    snapshot.epoch = estimator.current_epoch() - 1;
    snapshot.complete = complete;
    snapshot.empirical.reserve(d);
    snapshot.latent.reserve(d);
    for (int64_t i = 0; i < d; ++i) {
      snapshot.empirical.push_back(estimator.EstimateAt(i));
      snapshot.latent.push_back(*tasks[i].latent_p);
    }
    report.snapshots.push_back(std::move(snapshot));
  };

  std::vector<GroupOutcome> groups;
  for (int64_t iteration = 0; iteration < config.iterations; ++iteration) {
    std::vector<size_t> batch(order.begin() + batch_in_epoch * m,
                              order.begin() + (batch_in_epoch + 1) * m);

    std::vector<int64_t> counts;
    const bool first_epoch = estimator.current_epoch() == 0;
    if (config.policy == SimPolicy::kUniform || first_epoch) {
      counts = HomogeneousCounts(m, config.n_total);
    } else if (config.policy == SimPolicy::kFilter) {
      counts = HomogeneousCounts(m, config.n_total);
      for (size_t j = 0; j < batch.size(); ++j) {
        const Partition partition = PartitionOf(estimator.EstimateAt(batch[j]));
        if (partition == Partition::kZeroRate ||
            partition == Partition::kOneRate) {
          counts[j] = 0;
        }
      }
    } else {
      AllocationRequest request;
      request.config = allocation;
      request.tasks.reserve(batch.size());
      for (size_t index : batch) {
        request.tasks.push_back(
            {report.task_ids[index], estimator.EstimateAt(index), std::nullopt});
      }
      absl::StatusOr<AllocationTrace> trace = Allocate(request);
      if (!trace.ok()) return trace.status();
      counts = trace->plan.Counts();
    }

    groups.clear();
    int64_t executed = 0;
    for (size_t j = 0; j < batch.size(); ++j) {
      ++report.allocation_histogram[counts[j]];
      if (counts[j] == 0) continue;
      TaskRecord& task = tasks[batch[j]];
      absl::StatusOr<GroupOutcome> outcome =
          SampleRewards(task, counts[j], reward_rng);
      if (!outcome.ok()) return outcome.status();
      executed += outcome->size();
      const int64_t successes = outcome->successes();
      if (successes > 0) report.ever_solved[batch[j]] = true;
      estimator.RecordAt(batch[j], successes, outcome->size());
      task = ApplyUpdate(std::move(task), *outcome, config.eta_sim);
      groups.push_back(*std::move(outcome));
    }
    absl::StatusOr<IterationMetrics> metrics =
        ComputeIterationMetrics(iteration, groups);
    if (!metrics.ok()) {
      // Every task of the batch was filtered out.
      metrics = IterationMetrics{.iteration = iteration};
    }
    report.metrics.push_back(*metrics);
    report.planned_rollouts.push_back(config.n_total);
    report.executed_rollouts.push_back(executed);
    epoch_has_data = true;

    if (++batch_in_epoch == batches_per_epoch) {
      take_snapshot(/*complete=*/true);
      epoch_has_data = false;
      batch_in_epoch = 0;
      std::shuffle(order.begin(), order.end(), order_rng);
    }
  }
  if (epoch_has_data) take_snapshot(/*complete=*/false);

  report.final_latent.reserve(d);
  for (const TaskRecord& task : tasks) report.final_latent.push_back(*task.latent_p);
  if (!report.snapshots.empty()) {
    absl::StatusOr<TransitionCounts> transitions =
        TransitionMatrix(report, 0, report.snapshots.size() - 1);
    if (!transitions.ok()) return transitions.status();
    report.transition_matrix = *transitions;
  }
  return report;
}

absl::StatusOr<TransitionCounts> TransitionMatrix(const SimReport& report,
                                                  size_t start_epoch,
                                                  size_t end_epoch,
                                                  StatusBinning binning) {
  if (start_epoch >= report.snapshots.size() ||
      end_epoch >= report.snapshots.size()) {
    return absl::NotFoundError(absl::StrCat(
        "no snapshot for epoch ", std::max(start_epoch, end_epoch), " (",
        report.snapshots.size(), " recorded)"));
  }
  const EpochSnapshot& start = report.snapshots[start_epoch];
  const EpochSnapshot& end = report.snapshots[end_epoch];
  TransitionCounts counts{};
  for (size_t i = 0; i < start.latent.size(); ++i) {
    bool start_defined = false;
    bool end_defined = false;
    const StatusCategory from = BinOf(start, i, binning, &start_defined);
    const StatusCategory to = BinOf(end, i, binning, &end_defined);
    if (!start_defined || !end_defined) continue;
    ++counts[static_cast<int>(from)][static_cast<int>(to)];
  }
  return counts;
}

void WriteMetricsCsv(const SimReport& report, std::ostream& out) {
  out << kMetricsCsvHeader << '\n';
  for (const IterationMetrics& row : report.metrics) {
    out << row.iteration << ',' << FormatNumber(row.effective_gradient_ratio)
        << ',' << FormatNumber(row.zero_grad_all_positive) << ','
        << FormatNumber(row.zero_grad_all_negative) << ',' << row.mixed_groups
        << ',' << row.total_samples << '\n';
  }
}

void WriteTransitionCsv(const TransitionCounts& counts, std::ostream& out) {
  out << "from";
  for (int j = 0; j < kNumStatusCategories; ++j) {
    out << ',' << StatusCategoryName(static_cast<StatusCategory>(j));
  }
  out << '\n';
  for (int i = 0; i < kNumStatusCategories; ++i) {
    out << StatusCategoryName(static_cast<StatusCategory>(i));
    for (int j = 0; j < kNumStatusCategories; ++j) out << ',' << counts[i][j];
    out << '\n';
  }
}

void WriteHistogramCsv(const SimReport& report, std::ostream& out) {
  out << "budget,count\n";
  for (const auto& [budget, count] : report.allocation_histogram) {
    out << budget << ',' << count << '\n';
  }
}

void WriteSnapshotsJsonl(const SimReport& report, std::ostream& out) {
  for (const EpochSnapshot& snapshot : report.snapshots) {
    out << "{\"epoch\":" << snapshot.epoch
        << ",\"complete\":" << (snapshot.complete ? "true" : "false")
        << ",\"empirical\":[";
    for (size_t i = 0; i < snapshot.empirical.size(); ++i) {
      if (i > 0) out << ',';
      if (snapshot.empirical[i].has_value()) {
        out << FormatNumber(*snapshot.empirical[i]);
      } else {
        out << "null";
      }
    }
    out << "],\"latent\":[";
    for (size_t i = 0; i < snapshot.latent.size(); ++i) {
      if (i > 0) out << ',';
      out << FormatNumber(snapshot.latent[i]);
    }
    out << "]}\n";
  }
}

}  // namespace knapsack_rl
