// Copyright 2026 The wmsim Authors
//
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wmsim::cli {

using Json = nlohmann::json;

enum class Command {
  kWeakValue,
  kDensity,
  kPostselectProb,
  kKick,
  kSequential,
  kCollective,
  kLindblad,
  kDisturbance,
  kSimulate,
  kAnomalous,
  kThreshold,
};

std::string_view to_string(Command c);
/// Throws kSchemaError for unknown names.
Command command_from_string(std::string_view name);
std::vector<std::string_view> command_names();

/// A validated configuration. `params` holds every accepted key with
/// defaults filled in; `hash` is the FNV-1a hash of `params` without the
/// keys that cannot change results (threads, out).
struct RunConfig {
  Command command;
  Json params;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<std::filesystem::path> out;
  std::string format = "csv";
  std::uint64_t hash = 0;
};

/// Validates a JSON document against the schema of its "command" key.
/// Unknown keys, wrong types, non-Hermitian observables and unnormalized
/// states throw kSchemaError naming the offending field.
RunConfig parse_config(const Json& document);

/// Parses JSON text (inline or file contents); malformed JSON throws
/// kSchemaError, an unreadable file kFileError.
Json parse_json_text(std::string_view text, std::string_view origin);
Json load_config_file(const std::filesystem::path& path);

/// Comma- or space-separated list of numbers.
std::vector<double> parse_number_list(std::string_view text);

}  // namespace wmsim::cli
