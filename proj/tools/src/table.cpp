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

#include "wmsim/cli/table.hpp"

#include <fstream>

#include <fmt/format.h>

#include "wmsim/error.hpp"
#include "wmsim/json_io.hpp"

namespace wmsim::cli {

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw Error(ErrorCode::kInvalidArgument, "row width differs from header");
  }
  rows.push_back(std::move(row));
}

std::string number(double v) { return fmt::format("{}", v); }
std::string number(std::uint64_t v) { return fmt::format("{}", v); }

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const Table& table, std::uint64_t config_hash, std::uint64_t seed) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
  out += fmt::format("# config_hash={} seed={}\n", json_io::hex64(config_hash), seed);
  return out;
}

nlohmann::json to_json(const Table& table, std::uint64_t config_hash, std::uint64_t seed) {
  return {{"columns", table.columns},
          {"rows", table.rows},
          {"config_hash", json_io::hex64(config_hash)},
          {"seed", seed}};
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kFileError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kFileError, "write failed for " + path.string());
}

}  // namespace wmsim::cli
