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

#include "knapsack_rl/cli/task_file.h"

#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "json.hpp"

namespace knapsack_rl::cli {
namespace {

// Splits `text` into (line number, content) pairs with comments and blank
// lines removed.
std::vector<std::pair<int, std::string>> ContentLines(std::string_view text) {
  std::vector<std::pair<int, std::string>> lines;
  int number = 0;
  for (absl::string_view raw :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++number;
    const size_t comment = raw.find('#');
    if (comment != absl::string_view::npos) raw = raw.substr(0, comment);
    raw = absl::StripAsciiWhitespace(raw);
    if (!raw.empty()) lines.emplace_back(number, std::string(raw));
  }
  return lines;
}

absl::Status LineError(std::string_view source, int line,
                       const std::string& what) {
  return absl::InvalidArgumentError(
      absl::StrCat(std::string(source), ":", line, ": ", what));
}

absl::StatusOr<std::optional<double>> ParseRate(std::string_view source,
                                                int line,
                                                absl::string_view field,
                                                absl::string_view name) {
  if (field.empty()) return std::optional<double>();
  double value = 0.0;
  if (!absl::SimpleAtod(field, &value)) {
    return LineError(source, line,
                     absl::StrCat(name, " '", field, "' is not a number"));
  }
  if (!IsProbability(value)) {
    return LineError(source, line,
                     absl::StrCat(name, " = ", field, " is outside [0, 1]"));
  }
  return std::optional<double>(value);
}

}  // namespace

absl::StatusOr<std::vector<TaskRecord>> ParseTaskFile(std::string_view text,
                                                      std::string_view source) {
  std::vector<TaskRecord> tasks;
  std::set<std::string> seen;
  for (const auto& [line, content] : ContentLines(text)) {
    std::vector<absl::string_view> fields = absl::StrSplit(content, ',');
    for (absl::string_view& field : fields) {
      field = absl::StripAsciiWhitespace(field);
    }
    if (fields.size() < 2 || fields.size() > 4) {
      return LineError(source, line,
                       absl::StrCat("expected 2 to 4 fields, got ",
                                    fields.size()));
    }
    TaskRecord task;
    task.task_id = std::string(fields[0]);
    if (task.task_id.empty()) return LineError(source, line, "empty task_id");
    if (!seen.insert(task.task_id).second) {
      return LineError(source, line,
                       absl::StrCat("duplicate task_id '", task.task_id, "'"));
    }
    if (fields[1] != "?") {
      if (fields[1].empty()) {
        return LineError(source, line, "est_p is empty (use '?' if unknown)");
      }
      auto est_p = ParseRate(source, line, fields[1], "est_p");
      if (!est_p.ok()) return est_p.status();
      task.est_p = *est_p;
    }
    if (fields.size() > 2) {
      auto latent = ParseRate(source, line, fields[2], "latent_p");
      if (!latent.ok()) return latent.status();
      task.latent_p = *latent;
    }
    if (fields.size() > 3) {
      auto greedy = ParseRate(source, line, fields[3], "greedy_prob");
      if (!greedy.ok()) return greedy.status();
      task.greedy_prob = *greedy;
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

absl::StatusOr<BudgetPlan> ParsePlanFile(std::string_view text,
                                         std::string_view source) {
  BudgetPlan plan;
  std::set<std::string> seen;
  for (const auto& [line, content] : ContentLines(text)) {
    Allocation allocation;
    if (content.front() == '{') {
      nlohmann::json record = nlohmann::json::parse(content, nullptr, false);
      if (record.is_discarded() || !record.is_object()) {
        return LineError(source, line, "malformed JSON record");
      }
      if (!record.contains("task_id") || !record["task_id"].is_string() ||
          !record.contains("allocation") ||
          !record["allocation"].is_number_integer()) {
        return LineError(source, line,
                         "record needs string task_id and integer allocation");
      }
      allocation.task_id = record["task_id"].get<std::string>();
      allocation.rollouts = record["allocation"].get<int64_t>();
    } else {
      std::vector<absl::string_view> fields = absl::StrSplit(content, ',');
      if (fields.size() != 2) {
        return LineError(source, line,
                         absl::StrCat("expected 'task_id,rollouts', got ",
                                      fields.size(), " fields"));
      }
      const absl::string_view id = absl::StripAsciiWhitespace(fields[0]);
      const absl::string_view count = absl::StripAsciiWhitespace(fields[1]);
      // Header row.
      if (plan.allocations.empty() && seen.empty() && id == "task_id") {
        continue;
      }
      allocation.task_id = std::string(id);
      if (!absl::SimpleAtoi(count, &allocation.rollouts)) {
        return LineError(source, line,
                         absl::StrCat("rollouts '", count,
                                      "' is not an integer"));
      }
    }
    if (allocation.task_id.empty()) {
      return LineError(source, line, "empty task_id");
    }
    if (allocation.rollouts < 0) {
      return LineError(source, line, "rollouts must be >= 0");
    }
    if (!seen.insert(allocation.task_id).second) {
      return LineError(source, line, absl::StrCat("duplicate task_id '",
                                                  allocation.task_id, "'"));
    }
    plan.total += allocation.rollouts;
    plan.allocations.push_back(std::move(allocation));
  }
  plan.requested_total = plan.total;
  return plan;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream contents;
  contents << in.rdbuf();
  if (in.bad()) return absl::DataLossError(absl::StrCat("cannot read ", path));
  return contents.str();
}

}  // namespace knapsack_rl::cli
