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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wmsim::cli {

/// Rows of preformatted cells under a header.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

/// Shortest round-trip decimal form of a double.
std::string number(double v);
std::string number(std::uint64_t v);

/// RFC 4180 quoting: fields containing a comma, quote or line break are
/// wrapped in quotes with inner quotes doubled.
std::string csv_field(std::string_view field);

/// CSV with a header, CRLF-free line endings and a trailing
/// "# config_hash=<hex> seed=<n>" comment line.
std::string to_csv(const Table& table, std::uint64_t config_hash, std::uint64_t seed);
nlohmann::json to_json(const Table& table, std::uint64_t config_hash, std::uint64_t seed);

/// Writes `text` to `path`, creating parent directories. kFileError on failure.
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace wmsim::cli
