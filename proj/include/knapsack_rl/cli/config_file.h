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

// Flat declarative configuration files:
//
//   # comment
//   [simulation]
//   iterations = 300
//   policy = knapsack
//
// Keys are addressed as "section.key"; keys before any header live in the
// empty section and are addressed by their bare name.

#ifndef KNAPSACK_RL_CLI_CONFIG_FILE_H_
#define KNAPSACK_RL_CLI_CONFIG_FILE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace knapsack_rl::cli {

class ConfigFile {
 public:
  ConfigFile() = default;

  // `source` names the input in error messages ("<source>:<line>: ...").
  static absl::StatusOr<ConfigFile> Parse(std::string_view text,
                                          std::string_view source);

  std::optional<std::string> Get(const std::string& key) const;

  // Typed lookups; a present but malformed value is an error.
  absl::StatusOr<std::optional<int64_t>> GetInt(const std::string& key) const;
  absl::StatusOr<std::optional<double>> GetDouble(const std::string& key) const;
  absl::StatusOr<std::optional<bool>> GetBool(const std::string& key) const;

  // Fails on the first key of `section` that is not in `allowed`.
  absl::Status CheckKeys(const std::string& section,
                         const std::vector<std::string>& allowed) const;

  // "<source>:<line>" of `key`, or just the source when absent.
  std::string Location(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
  std::map<std::string, int> lines_;
  std::string source_;
};

}  // namespace knapsack_rl::cli

#endif  // KNAPSACK_RL_CLI_CONFIG_FILE_H_
