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

#include "knapsack_rl/cli/config_file.h"

#include <algorithm>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace knapsack_rl::cli {

absl::StatusOr<ConfigFile> ConfigFile::Parse(std::string_view text,
                                             std::string_view source) {
  ConfigFile config;
  config.source_ = std::string(source);
  std::string section;
  int line_number = 0;
  for (absl::string_view raw :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_number;
    absl::string_view line = absl::StripAsciiWhitespace(raw);
    const size_t comment = line.find('#');
    if (comment != absl::string_view::npos) {
      line = absl::StripAsciiWhitespace(line.substr(0, comment));
    }
    if (line.empty()) continue;
    const auto error = [&](absl::string_view what) {
      return absl::InvalidArgumentError(
          absl::StrCat(config.source_, ":", line_number, ": ", what));
    };
    if (line.front() == '[') {
      if (line.back() != ']') return error("unterminated section header");
      section = std::string(
          absl::StripAsciiWhitespace(line.substr(1, line.size() - 2)));
      if (section.empty()) return error("empty section name");
      continue;
    }
    const size_t equals = line.find('=');
    if (equals == absl::string_view::npos) {
      return error(absl::StrCat("expected 'key = value', got '", line, "'"));
    }
    const std::string key(absl::StripAsciiWhitespace(line.substr(0, equals)));
    const std::string value(absl::StripAsciiWhitespace(line.substr(equals + 1)));
    if (key.empty()) return error("missing key");
    const std::string full_key = section.empty() ? key : section + "." + key;
    if (config.entries_.count(full_key) > 0) {
      return error(absl::StrCat("duplicate key '", full_key, "'"));
    }
    config.entries_[full_key] = value;
    config.lines_[full_key] = line_number;
  }
  return config;
}

std::optional<std::string> ConfigFile::Get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string ConfigFile::Location(const std::string& key) const {
  const auto it = lines_.find(key);
  if (it == lines_.end()) return source_;
  return absl::StrCat(source_, ":", it->second);
}

absl::StatusOr<std::optional<int64_t>> ConfigFile::GetInt(
    const std::string& key) const {
  const std::optional<std::string> raw = Get(key);
  if (!raw.has_value()) return std::optional<int64_t>();
  int64_t value = 0;
  if (!absl::SimpleAtoi(*raw, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat(source_, ":", lines_.at(key), ": '", key,
                     "' expects an integer, got '", *raw, "'"));
  }
  return std::optional<int64_t>(value);
}

absl::StatusOr<std::optional<double>> ConfigFile::GetDouble(
    const std::string& key) const {
  const std::optional<std::string> raw = Get(key);
  if (!raw.has_value()) return std::optional<double>();
  double value = 0.0;
  if (!absl::SimpleAtod(*raw, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat(source_, ":", lines_.at(key), ": '", key,
                     "' expects a number, got '", *raw, "'"));
  }
  return std::optional<double>(value);
}

absl::StatusOr<std::optional<bool>> ConfigFile::GetBool(
    const std::string& key) const {
  const std::optional<std::string> raw = Get(key);
  if (!raw.has_value()) return std::optional<bool>();
  bool value = false;
  if (!absl::SimpleAtob(*raw, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat(source_, ":", lines_.at(key), ": '", key,
                     "' expects true or false, got '", *raw, "'"));
  }
  return std::optional<bool>(value);
}

absl::Status ConfigFile::CheckKeys(
    const std::string& section, const std::vector<std::string>& allowed) const {
  const std::string prefix = section + ".";
  for (const auto& [key, value] : entries_) {
    if (key.rfind(prefix, 0) != 0) continue;
    const std::string bare = key.substr(prefix.size());
    if (std::find(allowed.begin(), allowed.end(), bare) == allowed.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          source_, ":", lines_.at(key), ": unknown key '", key, "'"));
    }
  }
  return absl::OkStatus();
}

}  // namespace knapsack_rl::cli
