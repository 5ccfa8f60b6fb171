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

// Locale-independent text output shared by every CSV/JSON writer.

#ifndef KNAPSACK_RL_FORMAT_H_
#define KNAPSACK_RL_FORMAT_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"

namespace knapsack_rl {

// Shortest decimal form with at most 10 significant digits, '.' separator.
// Non-finite values print as "inf", "-inf" or "nan".
std::string FormatNumber(double value);

// Quotes a CSV field when it contains a comma, quote or line break.
std::string CsvField(std::string_view field);

// JSON string literal, including the surrounding quotes.
std::string JsonString(std::string_view text);

// Writes `contents` to a temporary sibling of `path` and renames it into
// place.
absl::Status WriteFileAtomic(const std::string& path,
                             std::string_view contents);

}  // namespace knapsack_rl

#endif  // KNAPSACK_RL_FORMAT_H_
