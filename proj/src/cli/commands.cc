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

#include "knapsack_rl/cli/commands.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "knapsack_rl/allocator.h"
#include "knapsack_rl/balancer.h"
#include "knapsack_rl/cli/config_file.h"
#include "knapsack_rl/cli/task_file.h"
#include "knapsack_rl/format.h"
#include "knapsack_rl/simulator.h"
#include "knapsack_rl/value_model.h"

namespace knapsack_rl::cli {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Parameters shared by config files, flags and --print-config.

using Target = std::variant<int64_t*, uint64_t*, double*, bool*, std::string*,
                            std::vector<std::string>*>;

struct Param {
  std::string key;
  std::string help;
  Target target;
  // Raw flag input, applied after the config file.
  std::optional<std::string> flag;
  std::vector<std::string> flag_list;
};

std::string FlagName(const std::string& key) {
  std::string name = "--" + key;
  std::replace(name.begin(), name.end(), '_', '-');
  return name;
}

std::string Render(const Target& target) {
  struct Visitor {
    std::string operator()(int64_t* v) const { return absl::StrCat(*v); }
    std::string operator()(uint64_t* v) const { return absl::StrCat(*v); }
    std::string operator()(double* v) const { return FormatNumber(*v); }
    std::string operator()(bool* v) const { return *v ? "true" : "false"; }
    std::string operator()(std::string* v) const { return *v; }
    std::string operator()(std::vector<std::string>* v) const {
      return absl::StrJoin(*v, ",");
    }
  };
  return std::visit(Visitor{}, target);
}

absl::Status Assign(const Target& target, const std::string& text,
                    const std::string& where, const std::string& key) {
  const auto bad = [&](absl::string_view expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        where, ": '", key, "' expects ", expected, ", got '", text, "'"));
  };
  if (auto* v = std::get_if<int64_t*>(&target)) {
    if (!absl::SimpleAtoi(text, *v)) return bad("an integer");
  } else if (auto* v = std::get_if<uint64_t*>(&target)) {
    if (!absl::SimpleAtoi(text, *v)) return bad("an unsigned integer");
  } else if (auto* v = std::get_if<double*>(&target)) {
    if (!absl::SimpleAtod(text, *v) || !std::isfinite(**v)) {
      return bad("a finite number");
    }
  } else if (auto* v = std::get_if<bool*>(&target)) {
    if (!absl::SimpleAtob(text, *v)) return bad("true or false");
  } else if (auto* v = std::get_if<std::string*>(&target)) {
    **v = text;
  } else if (auto* v = std::get_if<std::vector<std::string>*>(&target)) {
    (*v)->clear();
    for (absl::string_view item : absl::StrSplit(text, ',')) {
      item = absl::StripAsciiWhitespace(item);
      if (!item.empty()) (*v)->emplace_back(item);
    }
  }
  return absl::OkStatus();
}

class ParamSet {
 public:
  explicit ParamSet(std::string section) : section_(std::move(section)) {}

  template <typename T>
  void Add(std::string key, T* target, std::string help) {
    params_.push_back({std::move(key), std::move(help), target, {}, {}});
  }

  void Register(CLI::App* app) {
    for (Param& param : params_) {
      if (std::holds_alternative<bool*>(param.target)) {
        const std::string name = FlagName(param.key);
        std::optional<std::string>* flag = &param.flag;
        app->add_flag_function(
            name + ",!--no-" + name.substr(2),
            [flag](int64_t count) { *flag = count > 0 ? "true" : "false"; },
            param.help);
      } else if (std::holds_alternative<std::vector<std::string>*>(
                     param.target)) {
        app->add_option(FlagName(param.key), param.flag_list,
                        param.help + " (repeatable)");
      } else {
        app->add_option(FlagName(param.key), param.flag, param.help);
      }
    }
  }

  // Positional alias for one string parameter.
  void RegisterPositional(CLI::App* app, const std::string& key,
                          const std::string& name) {
    for (Param& param : params_) {
      if (param.key == key) {
        app->add_option(name, param.flag, param.help);
      }
    }
  }

  absl::Status Apply(const ConfigFile* file) {
    if (file != nullptr) {
      std::vector<std::string> keys;
      for (const Param& param : params_) keys.push_back(param.key);
      if (auto s = file->CheckKeys(section_, keys); !s.ok()) return s;
      for (const Param& param : params_) {
        const std::string full = section_ + "." + param.key;
        if (auto value = file->Get(full)) {
          if (auto s = Assign(param.target, *value, file->Location(full),
                              full);
              !s.ok()) {
            return s;
          }
        }
      }
    }
    for (const Param& param : params_) {
      const std::string name = FlagName(param.key);
      if (param.flag.has_value()) {
        if (auto s = Assign(param.target, *param.flag, name, param.key);
            !s.ok()) {
          return s;
        }
      }
      if (!param.flag_list.empty()) {
        if (auto s = Assign(param.target, absl::StrJoin(param.flag_list, ","),
                            name, param.key);
            !s.ok()) {
          return s;
        }
      }
    }
    return absl::OkStatus();
  }

  std::vector<std::pair<std::string, std::string>> Resolved() const {
    std::vector<std::pair<std::string, std::string>> values;
    for (const Param& param : params_) {
      values.emplace_back(param.key, Render(param.target));
    }
    return values;
  }

  std::string ConfigText() const {
    std::string text = absl::StrCat("[", section_, "]\n");
    for (const Param& param : params_) {
      absl::StrAppend(&text, "# ", param.help, "\n", param.key, " = ",
                      Render(param.target), "\n");
    }
    return text;
  }

  const std::string& section() const { return section_; }

 private:
  std::string section_;
  std::vector<Param> params_;
};

// ---------------------------------------------------------------------------
// Run manifest and output directories.

struct InputDigest {
  std::string role;
  std::string path;
  std::string sha256;
};

struct RunContext {
  std::string subcommand;
  const ParamSet* params = nullptr;
  std::vector<InputDigest> inputs;
  uint64_t seed = 0;
  std::string out_dir;
};

std::string ManifestJson(const RunContext& context) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["subcommand"] = context.subcommand;
  manifest["seed"] = context.seed;
  manifest["output_directory"] = context.out_dir;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : context.params->Resolved()) {
    config[key] = value;
  }
  manifest["config"] = std::move(config);
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const InputDigest& input : context.inputs) {
    inputs.push_back(
        {{"role", input.role}, {"path", input.path}, {"sha256", input.sha256}});
  }
  manifest["inputs"] = std::move(inputs);
  return manifest.dump(2) + "\n";
}

absl::Status MakeDirectory(const std::string& path) {
  std::error_code error;
  fs::create_directories(path, error);
  if (error) {
    return absl::InternalError(
        absl::StrCat("cannot create directory ", path, ": ", error.message()));
  }
  return absl::OkStatus();
}

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Creates the output directory and writes manifest.json and resolved.conf.
absl::Status PrepareOutput(const RunContext& context) {
  if (auto s = MakeDirectory(context.out_dir); !s.ok()) return s;
  if (auto s = WriteFileAtomic(JoinPath(context.out_dir, "manifest.json"),
                               ManifestJson(context));
      !s.ok()) {
    return s;
  }
  return WriteFileAtomic(JoinPath(context.out_dir, "resolved.conf"),
                         context.params->ConfigText());
}

absl::StatusOr<std::string> ReadInput(const std::string& role,
                                      const std::string& path,
                                      RunContext& context) {
  auto contents = ReadFile(path);
  if (!contents.ok()) return contents.status();
  context.inputs.push_back({role, path, Sha256Hex(*contents)});
  return contents;
}

// ---------------------------------------------------------------------------
// Subcommand state.

struct Common {
  std::string config_path;
  std::string out_dir;
  bool print_config = false;
};

struct AllocateArgs {
  std::string tasks;
  int64_t n_total = 0;
  int64_t rollouts_per_task = 8;
  int64_t n_low = 2;
  int64_t n_up = 128;
  double alpha = 0.9;
  std::string algorithm = "GRPO";
  bool fallback = true;
  uint64_t seed = 0;
  ParamSet params{"allocate"};

  AllocateArgs() {
    params.Add("tasks", &tasks, "task file: task_id, est_p or ?, [latent_p], "
                                "[greedy_prob]");
    params.Add("n_total", &n_total,
               "total rollouts; 0 means rollouts_per_task x number of tasks");
    params.Add("rollouts_per_task", &rollouts_per_task,
               "per-task budget used when n_total is 0");
    params.Add("n_low", &n_low, "minimum rollouts per task");
    params.Add("n_up", &n_up, "maximum rollouts per task");
    params.Add("alpha", &alpha, "confidence level of the reserved budgets");
    params.Add("algorithm", &algorithm, "GRPO, RLOO, REINFORCE or ReMax");
    params.Add("fallback", &fallback,
               "reserve interior budgets and route surplus to p_hat = 0 tasks");
    params.Add("seed", &seed, "recorded in the manifest; allocation is "
                              "deterministic");
  }
};

struct SimulateArgs {
  std::vector<std::string> policy = {"knapsack"};
  bool compare = false;
  int64_t num_seeds = 1;
  int64_t dataset_size = 2000;
  int64_t minibatch = 256;
  int64_t iterations = 300;
  int64_t n_total = 2048;
  double eta_sim = 0.3;
  std::string latent_init = "beta";
  double beta_a = 0.4;
  double beta_b = 1.6;
  double latent_constant = 0.5;
  double unsolvable_fraction = 0.15;
  int64_t n_low = 2;
  int64_t n_up = 128;
  double alpha = 0.9;
  std::string algorithm = "GRPO";
  uint64_t seed = 0;
  ParamSet params{"simulate"};

  SimulateArgs() {
    params.Add("policy", &policy,
               "uniform, filter, knapsack or knapsack-no-fallback");
    params.Add("compare", &compare,
               "write one subdirectory per run plus compare.csv");
    params.Add("num_seeds", &num_seeds, "runs seeds seed .. seed+num_seeds-1");
    params.Add("dataset_size", &dataset_size, "number of tasks");
    params.Add("minibatch", &minibatch, "tasks per iteration");
    params.Add("iterations", &iterations, "training iterations");
    params.Add("n_total", &n_total, "rollouts per iteration");
    params.Add("eta_sim", &eta_sim, "latent learning rate");
    params.Add("latent_init", &latent_init, "beta, uniform or constant");
    params.Add("beta_a", &beta_a, "Beta shape a of the solvable bulk");
    params.Add("beta_b", &beta_b, "Beta shape b of the solvable bulk");
    params.Add("latent_constant", &latent_constant,
               "latent rate for latent_init = constant");
    params.Add("unsolvable_fraction", &unsolvable_fraction,
               "share of tasks with latent rate 0");
    params.Add("n_low", &n_low, "knapsack minimum rollouts per task");
    params.Add("n_up", &n_up, "knapsack maximum rollouts per task");
    params.Add("alpha", &alpha, "knapsack reservation confidence");
    params.Add("algorithm", &algorithm, "GRPO, RLOO or REINFORCE");
    params.Add("seed", &seed, "base random seed");
  }
};

struct TheoryArgs {
  double alpha = 0.9;
  std::string algorithm = "GRPO";
  std::string greedy_prob = "none";
  int64_t p_steps = 100;
  int64_t n_max = 128;
  int64_t actions = 100;
  uint64_t seed = 0;
  ParamSet params{"theory"};

  TheoryArgs() {
    params.Add("alpha", &alpha, "confidence level of high_prob_budget");
    params.Add("algorithm", &algorithm,
               "value surface algorithm: GRPO, RLOO, REINFORCE or ReMax");
    params.Add("greedy_prob", &greedy_prob,
               "greedy success probability for ReMax, or none");
    params.Add("p_steps", &p_steps, "success-rate grid p = k / p_steps");
    params.Add("n_max", &n_max, "value surface budgets 1 .. n_max");
    params.Add("actions", &actions,
               "softmax size K of the InfoGain comparison");
    params.Add("seed", &seed, "recorded in the manifest; tables are exact");
  }
};

struct BalanceArgs {
  std::string plan;
  int64_t workers = 2;
  std::string strategy = "kk";
  uint64_t seed = 0;
  ParamSet params{"balance"};

  BalanceArgs() {
    params.Add("plan", &plan,
               "plan file: 'task_id,rollouts' CSV or allocation.jsonl");
    params.Add("workers", &workers, "number of workers");
    params.Add("strategy", &strategy, "kk or random");
    params.Add("seed", &seed, "dispatch seed for strategy = random");
  }
};

// ---------------------------------------------------------------------------
// Output helpers.

std::string OptionalNumber(const std::optional<double>& value) {
  return value.has_value() ? FormatNumber(*value) : "null";
}

absl::Status Emit(const std::string& out_dir, const std::string& name,
                  const std::string& contents, std::ostream& stream) {
  if (out_dir.empty()) {
    stream << contents;
    return absl::OkStatus();
  }
  return WriteFileAtomic(JoinPath(out_dir, name), contents);
}

// ---------------------------------------------------------------------------
// allocate

absl::Status RunAllocate(AllocateArgs& args, const Common& common,
                         std::ostream& out, std::ostream& err) {
  if (args.tasks.empty()) {
    return absl::InvalidArgumentError("allocate needs a task file");
  }
  auto algorithm = ParseAlgorithm(args.algorithm);
  if (!algorithm.ok()) return algorithm.status();

  RunContext context{"allocate", &args.params, {}, args.seed, common.out_dir};
  if (!common.config_path.empty()) {
    auto config_text = ReadInput("config", common.config_path, context);
    if (!config_text.ok()) return config_text.status();
  }
  auto text = ReadInput("tasks", args.tasks, context);
  if (!text.ok()) return text.status();
  auto records = ParseTaskFile(*text, args.tasks);
  if (!records.ok()) return records.status();
  if (records->empty()) {
    return absl::InvalidArgumentError(absl::StrCat(args.tasks, ": no tasks"));
  }
  const int64_t m = static_cast<int64_t>(records->size());
  if (args.n_total == 0) args.n_total = args.rollouts_per_task * m;

  AllocationRequest request;
  request.config.n_total = args.n_total;
  request.config.n_low = args.n_low;
  request.config.n_up = args.n_up;
  request.config.alpha = args.alpha;
  request.config.algorithm = *algorithm;
  request.config.fallback_enabled = args.fallback;
  for (const TaskRecord& record : *records) {
    request.tasks.push_back(
        {record.task_id, record.est_p, record.greedy_prob});
  }

  if (!common.out_dir.empty()) {
    if (auto s = PrepareOutput(context); !s.ok()) return s;
  }
  auto trace = Allocate(request);
  if (!trace.ok()) return trace.status();

  std::string lines;
  std::map<Partition, int64_t> partition_counts;
  for (size_t i = 0; i < trace->plan.allocations.size(); ++i) {
    const Allocation& allocation = trace->plan.allocations[i];
    ++partition_counts[trace->partition[i]];
    absl::StrAppend(&lines, "{\"task_id\":", JsonString(allocation.task_id),
                    ",\"est_p\":", OptionalNumber(request.tasks[i].est_p),
                    ",\"partition\":",
                    JsonString(PartitionName(trace->partition[i])),
                    ",\"allocation\":", allocation.rollouts, "}\n");
  }
  std::string summary = absl::StrCat(
      "{\"tasks\":", m, ",\"total\":", trace->plan.total,
      ",\"requested_total\":", trace->plan.requested_total,
      ",\"fallback\":", args.fallback ? "true" : "false",
      ",\"fallback_pool\":", trace->fallback_pool,
      ",\"objective\":", FormatNumber(trace->objective), ",\"partitions\":{");
  bool first = true;
  for (Partition partition : {Partition::kZeroRate, Partition::kOneRate,
                              Partition::kInterior, Partition::kUnknown}) {
    absl::StrAppend(&summary, first ? "" : ",",
                    JsonString(PartitionName(partition)), ":",
                    partition_counts[partition]);
    first = false;
  }
  absl::StrAppend(&summary, "}}\n");

  if (common.out_dir.empty()) {
    out << lines;
    err << summary;
    return absl::OkStatus();
  }
  if (auto s = Emit(common.out_dir, "allocation.jsonl", lines, out); !s.ok()) {
    return s;
  }
  if (auto s = Emit(common.out_dir, "summary.json", summary, out); !s.ok()) {
    return s;
  }
  out << summary;
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// theory

absl::Status RunTheory(TheoryArgs& args, const Common& common,
                       std::ostream& out) {
  auto algorithm = ParseAlgorithm(args.algorithm);
  if (!algorithm.ok()) return algorithm.status();
  std::optional<double> greedy;
  if (args.greedy_prob != "none") {
    double value = 0.0;
    if (!absl::SimpleAtod(args.greedy_prob, &value) || !IsProbability(value)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "greedy_prob must be none or a number in [0, 1], got '",
          args.greedy_prob, "'"));
    }
    greedy = value;
  }
  if (args.p_steps < 2) {
    return absl::InvalidArgumentError("p_steps must be at least 2");
  }
  if (args.n_max < 1) {
    return absl::InvalidArgumentError("n_max must be at least 1");
  }
  if (args.actions < 2) {
    return absl::InvalidArgumentError("actions must be at least 2");
  }
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) {
    return absl::InvalidArgumentError("alpha must lie in (0, 1)");
  }
  if (*algorithm == Algorithm::kRemax && !greedy.has_value()) {
    return absl::InvalidArgumentError("ReMax needs greedy_prob");
  }

  RunContext context{"theory", &args.params, {}, args.seed, common.out_dir};
  if (!common.config_path.empty()) {
    auto config_text = ReadInput("config", common.config_path, context);
    if (!config_text.ok()) return config_text.status();
  }
  if (!common.out_dir.empty()) {
    if (auto s = PrepareOutput(context); !s.ok()) return s;
  }

  std::vector<double> grid;
  for (int64_t k = 0; k <= args.p_steps; ++k) {
    grid.push_back(static_cast<double>(k) / static_cast<double>(args.p_steps));
  }

  std::string budget = "p,expected_first_nonzero,high_prob_budget\n";
  for (size_t k = 1; k + 1 < grid.size(); ++k) {
    auto expected = ExpectedFirstNonZero(grid[k]);
    if (!expected.ok()) return expected.status();
    auto high = HighProbBudget(grid[k], args.alpha);
    if (!high.ok()) return high.status();
    absl::StrAppend(&budget, FormatNumber(grid[k]), ",",
                    FormatNumber(*expected), ",", *high, "\n");
  }

  std::vector<int64_t> budgets;
  for (int64_t n = 1; n <= args.n_max; ++n) budgets.push_back(n);
  auto surface = ValueSurface(*algorithm, grid, budgets, greedy);
  if (!surface.ok()) return surface.status();
  std::string value = "p,n,value\n";
  for (const BudgetCurvePoint& point : *surface) {
    absl::StrAppend(&value, FormatNumber(point.p), ",", point.n, ",",
                    FormatNumber(point.value), "\n");
  }

  std::string info = "p,exact,approx,abs_error\n";
  for (double p : grid) {
    auto state = SoftmaxState::UniformResidual(static_cast<int>(args.actions),
                                               p);
    if (!state.ok()) return state.status();
    const double exact = InfoGainExact(*state);
    const double approx = InfoGainApprox(p);
    absl::StrAppend(&info, FormatNumber(p), ",", FormatNumber(exact), ",",
                    FormatNumber(approx), ",",
                    FormatNumber(std::abs(exact - approx)), "\n");
  }

  if (common.out_dir.empty()) {
    out << "# budget.csv\n" << budget << "\n# value_surface.csv\n" << value
        << "\n# info_gain.csv\n" << info;
    return absl::OkStatus();
  }
  for (const auto& [name, contents] :
       {std::pair<std::string, const std::string*>{"budget.csv", &budget},
        {"value_surface.csv", &value},
        {"info_gain.csv", &info}}) {
    if (auto s = WriteFileAtomic(JoinPath(common.out_dir, name), *contents);
        !s.ok()) {
      return s;
    }
  }
  out << "wrote budget.csv, value_surface.csv and info_gain.csv to "
      << common.out_dir << "\n";
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// simulate

struct SimRun {
  SimPolicy policy;
  uint64_t seed;
  std::string dir;
};

std::string RunSummaryJson(const SimReport& report) {
  int64_t planned = 0;
  int64_t executed = 0;
  for (int64_t v : report.planned_rollouts) planned += v;
  for (int64_t v : report.executed_rollouts) executed += v;
  const StatusCounts final_status = report.FinalStatusDistribution();
  std::string json = absl::StrCat(
      "{\"policy\":", JsonString(SimPolicyName(report.config.policy)),
      ",\"seed\":", report.config.seed,
      ",\"iterations\":", report.metrics.size(),
      ",\"mean_effective_ratio\":", FormatNumber(report.MeanEffectiveRatio()),
      ",\"max_allocation\":", report.MaxAllocation(),
      ",\"planned_rollouts\":", planned, ",\"executed_rollouts\":", executed,
      ",\"final_status\":{");
  for (int c = 0; c < kNumStatusCategories; ++c) {
    absl::StrAppend(&json, c == 0 ? "" : ",",
                    JsonString(StatusCategoryName(
                        static_cast<StatusCategory>(c))),
                    ":", final_status[c]);
  }
  absl::StrAppend(&json, "}}\n");
  return json;
}

absl::Status WriteRun(const SimReport& report, const std::string& dir) {
  if (auto s = MakeDirectory(dir); !s.ok()) return s;
  std::ostringstream metrics, transition, histogram, snapshots;
  WriteMetricsCsv(report, metrics);
  WriteTransitionCsv(report.transition_matrix, transition);
  WriteHistogramCsv(report, histogram);
  WriteSnapshotsJsonl(report, snapshots);
  for (const auto& [name, contents] :
       std::vector<std::pair<std::string, std::string>>{
           {"metrics.csv", metrics.str()},
           {"transition.csv", transition.str()},
           {"histogram.csv", histogram.str()},
           {"snapshots.jsonl", snapshots.str()},
           {"summary.json", RunSummaryJson(report)}}) {
    if (auto s = WriteFileAtomic(JoinPath(dir, name), contents); !s.ok()) {
      return s;
    }
  }
  return absl::OkStatus();
}

absl::Status RunSimulate(SimulateArgs& args, const Common& common,
                         std::ostream& out) {
  if (common.out_dir.empty()) {
    return absl::InvalidArgumentError("simulate needs --out DIR");
  }
  if (args.policy.empty()) {
    return absl::InvalidArgumentError("simulate needs at least one policy");
  }
  if (args.num_seeds < 1) {
    return absl::InvalidArgumentError("num_seeds must be at least 1");
  }
  SimConfig base;
  base.dataset_size = args.dataset_size;
  base.minibatch = args.minibatch;
  base.iterations = args.iterations;
  base.n_total = args.n_total;
  base.eta_sim = args.eta_sim;
  base.beta_a = args.beta_a;
  base.beta_b = args.beta_b;
  base.latent_constant = args.latent_constant;
  base.unsolvable_fraction = args.unsolvable_fraction;
  base.n_low = args.n_low;
  base.n_up = args.n_up;
  base.alpha = args.alpha;
  auto latent = ParseLatentInit(args.latent_init);
  if (!latent.ok()) return latent.status();
  base.latent_init = *latent;
  auto algorithm = ParseAlgorithm(args.algorithm);
  if (!algorithm.ok()) return algorithm.status();
  base.algorithm = *algorithm;

  std::vector<SimPolicy> policies;
  for (const std::string& name : args.policy) {
    auto policy = ParseSimPolicy(name);
    if (!policy.ok()) return policy.status();
    if (std::find(policies.begin(), policies.end(), *policy) !=
        policies.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("policy '", name, "' given twice"));
    }
    policies.push_back(*policy);
  }
  const bool split = args.compare || policies.size() > 1 || args.num_seeds > 1;
  std::vector<SimRun> runs;
  for (SimPolicy policy : policies) {
    for (int64_t s = 0; s < args.num_seeds; ++s) {
      SimRun run{policy, args.seed + static_cast<uint64_t>(s), common.out_dir};
      if (split) {
        run.dir = JoinPath(common.out_dir, std::string(SimPolicyName(policy)));
        if (args.num_seeds > 1) {
          run.dir = JoinPath(run.dir, absl::StrCat("seed-", run.seed));
        }
      }
      runs.push_back(std::move(run));
    }
  }
  for (const SimRun& run : runs) {
    SimConfig config = base;
    config.policy = run.policy;
    config.seed = run.seed;
    if (auto s = ValidateSimConfig(config); !s.ok()) return s;
  }

  RunContext context{"simulate", &args.params, {}, args.seed, common.out_dir};
  if (!common.config_path.empty()) {
    auto config_text = ReadInput("config", common.config_path, context);
    if (!config_text.ok()) return config_text.status();
  }
  if (auto s = PrepareOutput(context); !s.ok()) return s;

  std::vector<std::future<absl::StatusOr<SimReport>>> pending;
  for (const SimRun& run : runs) {
    SimConfig config = base;
    config.policy = run.policy;
    config.seed = run.seed;
    pending.push_back(std::async(std::launch::async, [config] {
      return RunSimulation(config);
    }));
  }
  std::vector<SimReport> reports;
  for (auto& future : pending) {
    absl::StatusOr<SimReport> report = future.get();
    if (!report.ok()) return report.status();
    reports.push_back(*std::move(report));
  }
  for (size_t i = 0; i < runs.size(); ++i) {
    if (auto s = WriteRun(reports[i], runs[i].dir); !s.ok()) return s;
  }

  if (!split) {
    out << RunSummaryJson(reports.front());
    return absl::OkStatus();
  }
  std::string compare =
      "policy,seed,mean_effective_ratio,final_extremely_hard,max_allocation,"
      "executed_rollouts\n";
  for (const SimReport& report : reports) {
    int64_t executed = 0;
    for (int64_t v : report.executed_rollouts) executed += v;
    absl::StrAppend(
        &compare, std::string(SimPolicyName(report.config.policy)), ",",
        report.config.seed, ",", FormatNumber(report.MeanEffectiveRatio()),
        ",", report.FinalStatusDistribution()[0], ",", report.MaxAllocation(),
        ",", executed, "\n");
  }
  if (auto s = WriteFileAtomic(JoinPath(common.out_dir, "compare.csv"),
                               compare);
      !s.ok()) {
    return s;
  }
  out << absl::StrFormat("%-22s %12s %22s %16s\n", "policy",
                         "mean_eff_ratio", "final_extremely_hard",
                         "max_allocation");
  for (size_t i = 0; i < reports.size(); i += args.num_seeds) {
    double ratio = 0.0;
    double hard = 0.0;
    int64_t max_allocation = 0;
    for (int64_t s = 0; s < args.num_seeds; ++s) {
      const SimReport& report = reports[i + s];
      ratio += report.MeanEffectiveRatio();
      hard += static_cast<double>(report.FinalStatusDistribution()[0]);
      max_allocation = std::max(max_allocation, report.MaxAllocation());
    }
    const double runs_per_policy = static_cast<double>(args.num_seeds);
    out << absl::StrFormat("%-22s %12s %22s %16d\n",
                           std::string(SimPolicyName(runs[i].policy)),
                           FormatNumber(ratio / runs_per_policy),
                           FormatNumber(hard / runs_per_policy),
                           max_allocation);
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// balance

absl::Status RunBalance(BalanceArgs& args, const Common& common,
                        std::ostream& out, std::ostream& err) {
  if (args.plan.empty()) {
    return absl::InvalidArgumentError("balance needs a plan file");
  }
  if (args.strategy != "kk" && args.strategy != "random") {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown strategy '", args.strategy, "' (expected kk or random)"));
  }
  if (args.workers < 1 || args.workers > (1 << 20)) {
    return absl::InvalidArgumentError(
        absl::StrCat("workers = ", args.workers, " must lie in [1, 2^20]"));
  }
  RunContext context{"balance", &args.params, {}, args.seed, common.out_dir};
  if (!common.config_path.empty()) {
    auto config_text = ReadInput("config", common.config_path, context);
    if (!config_text.ok()) return config_text.status();
  }
  auto text = ReadInput("plan", args.plan, context);
  if (!text.ok()) return text.status();
  auto plan = ParsePlanFile(*text, args.plan);
  if (!plan.ok()) return plan.status();
  if (plan->allocations.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(args.plan, ": no tasks"));
  }
  const int workers = static_cast<int>(args.workers);

  WorkerSchedule schedule;
  if (args.strategy == "random") {
    auto dispatched = RandomDispatch(*plan, workers, args.seed);
    if (!dispatched.ok()) return dispatched.status();
    schedule = *std::move(dispatched);
  } else {
    const std::vector<int64_t> loads = plan->Counts();
    auto groups = KkPartition(loads, workers);
    if (!groups.ok()) return groups.status();
    schedule = ScheduleFromGroups(*plan, *groups);
  }

  if (!common.out_dir.empty()) {
    if (auto s = PrepareOutput(context); !s.ok()) return s;
  }
  std::ostringstream csv;
  WriteScheduleCsv(schedule, csv);
  const std::string report =
      absl::StrCat("makespan ", Makespan(schedule.loads), "\nloads ",
                   absl::StrJoin(schedule.loads, " "), "\n");
  if (common.out_dir.empty()) {
    out << csv.str();
    err << report;
    return absl::OkStatus();
  }
  if (auto s = WriteFileAtomic(JoinPath(common.out_dir, "schedule.csv"),
                               csv.str());
      !s.ok()) {
    return s;
  }
  out << report;
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------

absl::StatusOr<std::optional<ConfigFile>> LoadConfig(const std::string& path) {
  if (path.empty()) return std::optional<ConfigFile>();
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  auto config = ConfigFile::Parse(*text, path);
  if (!config.ok()) return config.status();
  return std::optional<ConfigFile>(*std::move(config));
}

void AddCommon(CLI::App* app, Common& common) {
  app->add_option("--config", common.config_path,
                  "config file with `key = value` lines under [section] "
                  "headers; flags override it");
  app->add_option("--out", common.out_dir,
                  "output directory (receives manifest.json and "
                  "resolved.conf)");
  app->add_flag("--print-config", common.print_config,
                "print the resolved configuration and exit");
}

}  // namespace

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kOutOfRange:
      return kExitInfeasible;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Rollout budget allocation for group-based policy gradient "
               "training.",
               kToolName};
  app.set_version_flag("--version", kToolVersion);
  bool print_all = false;
  app.add_flag("--print-config", print_all,
               "print the defaults of every subcommand and exit");

  Common common;
  AllocateArgs allocate;
  SimulateArgs simulate;
  TheoryArgs theory;
  BalanceArgs balance;

  CLI::App* allocate_cmd = app.add_subcommand(
      "allocate", "Allocate a rollout budget across tasks.");
  allocate_cmd->footer(
      "Outputs: allocation.jsonl with one object per task "
      "{task_id, est_p (null if unknown), partition, allocation}; "
      "summary.json {tasks, total, requested_total, fallback, fallback_pool, "
      "objective, partitions}. Without --out the lines go to stdout and the "
      "summary to stderr.");
  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "Run the synthetic training-loop simulator.");
  simulate_cmd->footer(
      "Outputs per run: metrics.csv (iteration,effective_ratio,zero_pos,"
      "zero_neg,mixed_groups,total_samples); transition.csv (from,"
      "extremely-hard,hard,medium,easy,extremely-easy: counts from the first "
      "to the last epoch snapshot); histogram.csv (budget,count); "
      "snapshots.jsonl ({epoch, complete, empirical, latent} per epoch); "
      "summary.json. With several runs: one subdirectory per policy (and "
      "seed) plus compare.csv (policy,seed,mean_effective_ratio,"
      "final_extremely_hard,max_allocation,executed_rollouts).");
  CLI::App* theory_cmd = app.add_subcommand(
      "theory", "Emit budget, value-surface and InfoGain tables.");
  theory_cmd->footer(
      "Outputs: budget.csv (p,expected_first_nonzero,high_prob_budget) for "
      "interior grid points; value_surface.csv (p,n,value); info_gain.csv "
      "(p,exact,approx,abs_error) for a K-action softmax with uniform "
      "residual mass.");
  CLI::App* balance_cmd = app.add_subcommand(
      "balance", "Distribute a rollout plan over workers.");
  balance_cmd->footer(
      "Outputs: schedule.csv (worker,task_id,jobs) and the lines "
      "'makespan N' and 'loads l0 l1 ...'. Without --out the schedule goes "
      "to stdout and the makespan lines to stderr.");

  for (CLI::App* cmd : {allocate_cmd, simulate_cmd, theory_cmd, balance_cmd}) {
    AddCommon(cmd, common);
  }
  allocate.params.Register(allocate_cmd);
  allocate.params.RegisterPositional(allocate_cmd, "tasks", "task_file");
  simulate.params.Register(simulate_cmd);
  theory.params.Register(theory_cmd);
  balance.params.Register(balance_cmd);
  balance.params.RegisterPositional(balance_cmd, "plan", "plan_file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (print_all) {
    out << allocate.params.ConfigText() << "\n"
        << simulate.params.ConfigText() << "\n"
        << theory.params.ConfigText() << "\n"
        << balance.params.ConfigText();
    return kExitOk;
  }

  auto config = LoadConfig(common.config_path);
  if (!config.ok()) {
    err << "error: " << config.status().message() << "\n";
    return ExitCodeFor(config.status());
  }
  const ConfigFile* file = config->has_value() ? &**config : nullptr;

  struct Command {
    CLI::App* app;
    ParamSet* params;
    std::function<absl::Status()> run;
  };
  const std::vector<Command> commands = {
      {allocate_cmd, &allocate.params,
       [&] { return RunAllocate(allocate, common, out, err); }},
      {simulate_cmd, &simulate.params,
       [&] { return RunSimulate(simulate, common, out); }},
      {theory_cmd, &theory.params,
       [&] { return RunTheory(theory, common, out); }},
      {balance_cmd, &balance.params,
       [&] { return RunBalance(balance, common, out, err); }},
  };
  for (const Command& command : commands) {
    if (!command.app->parsed()) continue;
    if (auto s = command.params->Apply(file); !s.ok()) {
      err << "error: " << s.message() << "\n";
      return ExitCodeFor(s);
    }
    if (common.print_config) {
      out << command.params->ConfigText();
      return kExitOk;
    }
    const absl::Status status = command.run();
    if (!status.ok()) {
      err << "error: " << status.message() << "\n";
      return ExitCodeFor(status);
    }
    return kExitOk;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace knapsack_rl::cli
