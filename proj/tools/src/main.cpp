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

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wmsim/cli/config.hpp"
#include "wmsim/cli/dispatch.hpp"
#include "wmsim/error.hpp"

namespace {

struct Flags {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> json_text;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> lambda;
  std::optional<std::string> lambda_grid;
  std::optional<double> trials;
  std::optional<std::string> basis;
  std::optional<std::string> format;
  std::optional<std::string> protocol;
};

wmsim::cli::Json build_document(const Flags& f) {
  using wmsim::cli::Json;
  Json doc = Json::object();
  if (f.config_path) doc = wmsim::cli::load_config_file(*f.config_path);
  if (f.json_text) {
    const Json inline_doc = wmsim::cli::parse_json_text(*f.json_text, "--json");
    if (!inline_doc.is_object()) {
      throw wmsim::Error(wmsim::ErrorCode::kSchemaError, "--json: expected an object");
    }
    doc.update(inline_doc);
  }
  if (!doc.is_object()) {
    throw wmsim::Error(wmsim::ErrorCode::kSchemaError, "config: expected an object");
  }
  if (doc.contains("command") && doc["command"] != f.command) {
    throw wmsim::Error(wmsim::ErrorCode::kSchemaError,
                       "command: config says " + doc["command"].dump() +
                           " but the command line says \"" + f.command + "\"");
  }
  doc["command"] = f.command;
  if (f.out) doc["out"] = *f.out;
  if (f.seed) doc["seed"] = *f.seed;
  if (f.threads) doc["threads"] = *f.threads;
  if (f.lambda) {
    doc.erase("lambda_grid");
    doc["lambda"] = *f.lambda;
  }
  if (f.lambda_grid) {
    doc.erase("lambda");
    doc["lambda_grid"] = wmsim::cli::parse_number_list(*f.lambda_grid);
  }
  if (f.trials) {
    const double t = *f.trials;
    if (t == std::floor(t) && t >= 0 && t < 9.0e15) {
      doc["trials"] = static_cast<std::uint64_t>(t);
    } else {
      doc["trials"] = t;  // rejected by the schema
    }
  }
  if (f.basis) doc["basis"] = *f.basis;
  if (f.format) doc["format"] = *f.format;
  if (f.protocol) doc["protocol"] = *f.protocol;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-measurement simulator"};
  app.set_version_flag("--version", "wmsim 0.1.0");
  Flags f;
  std::string names;
  for (auto n : wmsim::cli::command_names()) names += (names.empty() ? "" : ", ") + std::string(n);
  app.add_option("command", f.command, "one of: " + names)->required();
  app.add_option("-c,--config", f.config_path, "JSON config file");
  app.add_option("--json", f.json_text, "inline JSON config, merged over --config");
  app.add_option("-o,--out", f.out, "artifact directory");
  app.add_option("--seed", f.seed, "RNG seed");
  app.add_option("--threads", f.threads, "worker threads (results do not depend on it)");
  app.add_option("--lambda", f.lambda, "coupling");
  app.add_option("--lambda-grid", f.lambda_grid, "comma-separated couplings");
  app.add_option("--trials", f.trials, "Monte Carlo trials");
  app.add_option("--basis", f.basis, "meter basis: x or xprime");
  app.add_option("--format", f.format, "artifact format: csv or json");
  app.add_option("--protocol", f.protocol,
                 "simulate protocol: single, kick, sequential, threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return wmsim::cli::kExitConfig;
  }

  try {
    const wmsim::cli::RunConfig cfg = wmsim::cli::parse_config(build_document(f));
    return wmsim::cli::run_guarded(cfg, std::cout, std::cerr);
  } catch (const wmsim::Error& e) {
    std::cerr << "wmsim: " << e.what() << '\n';
    return wmsim::cli::exit_code(e.code());
  }
}
