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

// Command-line front end: `allocate`, `simulate`, `theory` and `balance`.

#ifndef KNAPSACK_RL_CLI_COMMANDS_H_
#define KNAPSACK_RL_CLI_COMMANDS_H_

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"

namespace knapsack_rl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;

inline constexpr char kToolName[] = "knapsack_rl";
inline constexpr char kToolVersion[] = "0.1.0";

// `args` excludes the program name. Returns the process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// OutOfRange (infeasible instance) -> 3; InvalidArgument and NotFound -> 2;
// anything else -> 1.
int ExitCodeFor(const absl::Status& status);

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);

}  // namespace knapsack_rl::cli

#endif  // KNAPSACK_RL_CLI_COMMANDS_H_
