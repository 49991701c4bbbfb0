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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "wmsim/cli/config.hpp"
#include "wmsim/cli/dispatch.hpp"
#include "wmsim/cli/table.hpp"
#include "wmsim/error.hpp"

namespace wmsim::cli {
namespace {

namespace fs = std::filesystem;

const Json kSigmaX = Json::parse("[[0,1],[1,0]]");
const Json kSigmaZ = Json::parse("[[1,0],[0,-1]]");
const Json kUp = Json::parse("[1,0]");
const Json kPlus = Json::parse("[0.7071067811865476,0.7071067811865476]");
const Json kTilted = Json::parse("[0.6,0.8]");

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wmsim_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> parse_summary(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos) out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_doc(const Json& doc) {
  std::ostringstream out, err;
  try {
    const RunConfig cfg = parse_config(doc);
    return {run_guarded(cfg, out, err), out.str(), err.str()};
  } catch (const Error& e) {
    return {exit_code(e.code()), "", e.what()};
  }
}

int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(WMSIM_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

TEST(ParseConfigTest, MinimalWeakValue) {
  const RunConfig cfg = parse_config(
      {{"command", "weak-value"}, {"observable", kSigmaX}, {"psi", kUp}, {"phi", kPlus}});
  EXPECT_EQ(cfg.command, Command::kWeakValue);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_FALSE(cfg.out.has_value());
}

TEST(ParseConfigTest, NonHermitianNamesField) {
  try {
    parse_config({{"command", "weak-value"},
                  {"observable", Json::parse("[[0,1],[0,0]]")},
                  {"psi", kUp},
                  {"phi", kPlus}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("observable"), std::string::npos);
  }
}

TEST(ParseConfigTest, RejectsUnknownKeysAndConflicts) {
  try {
    parse_config({{"command", "kick"}, {"observable", kSigmaX}, {"psi", kUp}, {"phi", kPlus},
                  {"lambdas", 0.1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("lambdas"), std::string::npos);
  }
  EXPECT_THROW(parse_config({{"command", "kick"}, {"observable", kSigmaX}, {"psi", kUp},
                             {"phi", kPlus}, {"lambda", 0.1}, {"lambda_grid", {0.1, 0.2}}}),
               Error);
  EXPECT_THROW(parse_config({{"command", "nope"}}), Error);
  EXPECT_THROW(parse_config({{"command", "weak-value"}, {"psi", kUp}, {"phi", kPlus}}), Error);
  EXPECT_THROW(parse_config({{"command", "weak-value"}, {"observable", kSigmaX},
                             {"psi", Json::parse("[1,1]")}, {"phi", kPlus}}),
               Error);
  EXPECT_THROW(parse_json_text("{not json", "inline"), Error);
  try {
    load_config_file("/nonexistent/wmsim.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFileError);
  }
}

TEST(ParseConfigTest, DefaultsAndHash) {
  const Json doc = {{"command", "kick"}, {"observable", kSigmaX}, {"psi", kUp}, {"phi", kPlus}};
  const RunConfig a = parse_config(doc);
  EXPECT_EQ(a.params["lambda_grid"], Json::parse("[0.2,0.1,0.05,0.025]"));
  Json with_threads = doc;
  with_threads["threads"] = 8;
  EXPECT_EQ(parse_config(with_threads).hash, a.hash);
  Json with_seed = doc;
  with_seed["seed"] = 5;
  EXPECT_NE(parse_config(with_seed).hash, a.hash);
}

TEST(TableTest, QuotingAndMetadataLine) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  Table t{{"k", "v"}, {}};
  t.add_row({"x,y", number(0.1)});
  const std::string csv = to_csv(t, 0xabcULL, 7);
  EXPECT_EQ(csv, "k,v\n\"x,y\",0.1\n# config_hash=0000000000000abc seed=7\n");
}

TEST(DispatchTest, OrthogonalIsDomainError) {
  const Outcome o = run_doc({{"command", "weak-value"}, {"observable", kSigmaX}, {"psi", kUp},
                             {"phi", Json::parse("[0,1]")}});
  EXPECT_EQ(o.code, kExitDomain);
  EXPECT_NE(o.err.find("OrthogonalPostselection"), std::string::npos);
}

TEST(DispatchTest, AnomalousPairThroughWeakValue) {
  const fs::path dir = scratch("anomalous");
  const Outcome a = run_doc({{"command", "anomalous"}, {"observable", kSigmaX},
                             {"epsilon", 0.01}, {"out", dir.string()}});
  ASSERT_EQ(a.code, kExitSuccess) << a.err;
  const Json pair = Json::parse(slurp(dir / "anomalous.json"));
  const Outcome w = run_doc({{"command", "weak-value"}, {"observable", kSigmaX},
                             {"psi", pair["psi"]}, {"phi", pair["phi"]}});
  ASSERT_EQ(w.code, kExitSuccess) << w.err;
  const auto s = parse_summary(w.out);
  EXPECT_NEAR(std::stod(s.at("re")), 99.995, 1e-3);
  EXPECT_NEAR(std::stod(s.at("postselection_probability")), 1e-4, 1e-12);
  EXPECT_EQ(s.at("command"), "weak-value");
  EXPECT_EQ(s.at("anomalous"), "true");
}

TEST(DispatchTest, DensityIntegratesToOne) {
  for (const char* basis : {"x", "xprime"}) {
    for (bool with_phi : {true, false}) {
      const fs::path dir = scratch(std::string("density_") + basis);
      Json doc = {{"command", "density"}, {"observable", kSigmaX}, {"psi", kUp},
                  {"lambda", 0.1},        {"basis", basis},        {"out", dir.string()}};
      if (with_phi) doc["phi"] = kTilted;
      const Outcome o = run_doc(doc);
      ASSERT_EQ(o.code, kExitSuccess) << o.err;
      const auto rows = read_csv(dir / "density.csv");
      ASSERT_EQ(rows[0], (std::vector<std::string>{"x", "density"}));
      double integral = 0;
      for (std::size_t i = 2; i < rows.size(); ++i) {
        const double x0 = std::stod(rows[i - 1][0]), x1 = std::stod(rows[i][0]);
        integral += 0.5 * (x1 - x0) * (std::stod(rows[i - 1][1]) + std::stod(rows[i][1]));
      }
      EXPECT_NEAR(integral, 1.0, 1e-6);
      EXPECT_EQ(rows.size(), 2002u);
    }
  }
}

TEST(DispatchTest, GridCommandsEmitExtrapolationRow) {
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"postselect-prob", "postselect_prob.csv"}, {"kick", "kick.csv"},
      {"sequential", "sequential.csv"},           {"disturbance", "disturbance.csv"},
      {"lindblad", "gdi.csv"}};
  for (const auto& [name, file] : commands) {
    const fs::path dir = scratch("grid_" + name);
    Json doc = {{"command", name}, {"observable", kSigmaX}, {"psi", kPlus},
                {"phi", kTilted}, {"lambda_grid", {0.2, 0.1, 0.05}}, {"out", dir.string()}};
    if (name == "sequential") doc["observable_b"] = kSigmaZ;
    const Outcome o = run_doc(doc);
    ASSERT_EQ(o.code, kExitSuccess) << name << ": " << o.err;
    const auto rows = read_csv(dir / file);
    ASSERT_EQ(rows.size(), 5u) << name;
    EXPECT_EQ(rows[4][0], "extrapolation") << name;
    EXPECT_EQ(rows[0].back(), "fit_residual") << name;
    EXPECT_FALSE(rows[4].back().empty()) << name;
    const std::string text = slurp(dir / file);
    EXPECT_NE(text.rfind("# config_hash="), std::string::npos);
  }
}

TEST(DispatchTest, ZeroLambdaInGridIsConfigError) {
  const Outcome o = run_doc({{"command", "kick"}, {"observable", kSigmaX}, {"psi", kPlus},
                             {"phi", kTilted}, {"lambda_grid", {0.1, 0.0}}});
  EXPECT_EQ(o.code, kExitConfig);
}

TEST(DispatchTest, SummaryEndsWithHashAndSeed) {
  const Outcome o = run_doc({{"command", "postselect-prob"}, {"observable", kSigmaX},
                             {"psi", kUp}, {"phi", kUp}, {"seed", 3}});
  ASSERT_EQ(o.code, kExitSuccess);
  const auto s = parse_summary(o.out);
  EXPECT_EQ(s.at("seed"), "3");
  EXPECT_EQ(s.at("config_hash").size(), 16u);
  EXPECT_NEAR(std::stod(s.at("second_order_coeff")), -0.25, 1e-15);
}

TEST(BinaryTest, ExitCodes) {
  const fs::path log = scratch("exit.log");
  EXPECT_EQ(run_binary("weak-value --json '{\"observable\":[[0,1],[1,0]],\"psi\":[1,0],"
                       "\"phi\":[0,1]}'",
                       log),
            kExitDomain);
  EXPECT_EQ(run_binary("weak-value --json '{\"observable\":[[0,1],[1,0]],\"psi\":[1,0]}'", log),
            kExitConfig);
  EXPECT_EQ(run_binary("weak-value --no-such-flag", log), kExitConfig);
  EXPECT_EQ(run_binary("frobnicate", log), kExitConfig);
  EXPECT_EQ(run_binary("weak-value --config /nonexistent.json", log), kExitConfig);
  EXPECT_EQ(run_binary("weak-value --json '{\"observable\":[[0,1],[1,0]],\"psi\":[1,0],"
                       "\"phi\":[0.6,0.8]}'",
                       log),
            kExitSuccess);
  EXPECT_NE(slurp(log).find("command=weak-value"), std::string::npos);
}

TEST(BinaryTest, SimulateKickIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path base = scratch("simulate");
  const std::string cfg =
      "--json '{\"observable\":[[1,0],[0,-1]],\"psi\":[0.7071067811865476,0.7071067811865476],"
      "\"phi\":[0.6,[0,0.8]]}' --protocol kick --trials 1e6 --seed 42";
  ASSERT_EQ(run_binary("simulate " + cfg + " --threads 1 --out " + (base / "a").string(),
                       base.string() + ".log"),
            0);
  ASSERT_EQ(run_binary("simulate " + cfg + " --threads 1 --out " + (base / "b").string(),
                       base.string() + ".log"),
            0);
  ASSERT_EQ(run_binary("simulate " + cfg + " --threads 8 --out " + (base / "c").string(),
                       base.string() + ".log"),
            0);
  for (const char* f : {"records.csv", "stats.json"}) {
    const std::string a = slurp(base / "a" / f);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(base / "b" / f)) << f;
    EXPECT_EQ(a, slurp(base / "c" / f)) << f;
  }
}

}  // namespace
}  // namespace wmsim::cli
