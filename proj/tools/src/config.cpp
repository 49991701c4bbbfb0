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

#include "wmsim/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wmsim/json_io.hpp"
#include "wmsim/quantum_core.hpp"

namespace wmsim::cli {
namespace {

[[noreturn]] void schema(std::string_view field, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, std::string(field) + ": " + what);
}

enum class Kind {
  kMatrix,
  kState,
  kNumber,
  kNumberList,
  kCount,
  kCountOrList,
  kSeed,
  kBool,
  kChoice,
  kString,
};

struct Field {
  std::string_view name;
  Kind kind;
  Json fallback = nullptr;  // null: optional without default
  std::vector<std::string_view> choices = {};
  bool required = false;
};

const Json kDefaultGrid = Json::array({0.2, 0.1, 0.05, 0.025});

Field required(std::string_view name, Kind kind) {
  Field f{name, kind};
  f.required = true;
  return f;
}

Field choice(std::string_view name, std::vector<std::string_view> choices,
             std::string_view fallback) {
  return {name, Kind::kChoice, std::string(fallback), std::move(choices)};
}

std::vector<Field> schema_for(Command c) {
  std::vector<Field> f = {
      {"command", Kind::kString},
      {"seed", Kind::kSeed, 0},
      {"threads", Kind::kCount, 1},
      {"out", Kind::kString},
      choice("format", {"csv", "json"}, "csv"),
  };
  auto add = [&f](std::initializer_list<Field> more) { f.insert(f.end(), more); };
  const Field observable = required("observable", Kind::kMatrix);
  const Field psi = required("psi", Kind::kState);
  const Field phi = required("phi", Kind::kState);
  const Field lambda{"lambda", Kind::kNumber};
  const Field grid{"lambda_grid", Kind::kNumberList};
  const Field basis = choice("basis", {"x", "xprime"}, "x");
  switch (c) {
    case Command::kWeakValue:
      add({observable, psi, phi});
      break;
    case Command::kAnomalous:
      add({observable, required("epsilon", Kind::kNumber),
           choice("target", {"re", "im"}, "re"), {"psi", Kind::kState}});
      break;
    case Command::kDensity:
      add({observable, psi, {"phi", Kind::kState}, {"lambda", Kind::kNumber, 0.1}, basis,
           {"grid_points", Kind::kCount, 2001}, {"grid_halfwidth", Kind::kNumber, 10.0}});
      break;
    case Command::kPostselectProb:
    case Command::kDisturbance:
      add({observable, psi, phi, lambda, grid});
      break;
    case Command::kKick:
      add({observable, psi, phi, lambda, grid, {"grid_points", Kind::kCount, 201}});
      break;
    case Command::kSequential:
      add({observable, required("observable_b", Kind::kMatrix), psi, phi, lambda, grid,
           {"lambda_b", Kind::kNumber}, basis, choice("basis_b", {"x", "xprime"}, "x"),
           choice("order", {"a_first", "b_first"}, "a_first")});
      break;
    case Command::kCollective:
      add({observable, psi, phi, {"lambda", Kind::kNumber, 1.0},
           {"systems", Kind::kCountOrList, Json::array({25, 50, 100, 200, 400})},
           choice("engine", {"auto", "expansion", "spectral"}, "auto"),
           {"max_systems", Kind::kCount, 2000}, {"max_terms", Kind::kCount, 2001},
           {"grid_points", Kind::kCount, 512}});
      break;
    case Command::kLindblad:
      add({observable, psi, phi, lambda, grid, {"grid_points", Kind::kCount, 1024}});
      break;
    case Command::kSimulate:
      add({{"protocol", Kind::kChoice, "single"}, observable, psi, {"phi", Kind::kState},
           {"observable_b", Kind::kMatrix}, {"lambda", Kind::kNumber, 0.1},
           {"lambda_b", Kind::kNumber}, choice("order", {"a_first", "b_first"}, "a_first"),
           {"threshold_multiple", Kind::kNumber, 100.0}, {"trials", Kind::kCount, 100000},
           {"keep_records", Kind::kBool, true}, {"sampler_grid_points", Kind::kCount, 16384},
           {"sampler_grid_halfwidth", Kind::kNumber, 10.0}});
      for (Field& field : f) {
        if (field.name == "protocol") {
          field.choices = {"single", "kick", "sequential", "threshold"};
        }
      }
      break;
    case Command::kThreshold:
      add({observable, psi, {"lambda", Kind::kNumber, 0.01},
           {"threshold_multiple", Kind::kNumber, 100.0}, {"trials", Kind::kCount, 100000},
           {"keep_records", Kind::kBool, false}, {"sampler_grid_points", Kind::kCount, 16384},
           {"sampler_grid_halfwidth", Kind::kNumber, 10.0}});
      break;
  }
  return f;
}

bool grid_capable(Command c) {
  switch (c) {
    case Command::kPostselectProb:
    case Command::kKick:
    case Command::kSequential:
    case Command::kDisturbance:
    case Command::kLindblad:
      return true;
    default:
      return false;
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

double finite_number(const Json& v, std::string_view name) {
  if (!v.is_number()) schema(name, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema(name, "expected a finite number");
  return d;
}

std::int64_t count(const Json& v, std::string_view name) {
  // Integral floats such as 1e6 are accepted.
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!(d == std::floor(d)) || std::abs(d) > 9.0e15) schema(name, "expected an integer");
    if (d < 1) schema(name, "expected an integer >= 1");
    return static_cast<std::int64_t>(d);
  }
  if (!v.is_number_integer()) schema(name, "expected an integer");
  const std::int64_t n = v.get<std::int64_t>();
  if (n < 1) schema(name, "expected an integer >= 1");
  return n;
}

Json validate_field(const Field& f, const Json& v) {
  const std::string name(f.name);
  switch (f.kind) {
    case Kind::kMatrix: {
      const Matrix m = json_io::matrix_from_json(v, name);
      try {
        Observable check(m);
      } catch (const Error& e) {
        schema(name, e.what());
      }
      return json_io::matrix_to_json(m);
    }
    case Kind::kState: {
      const Vector s = json_io::vector_from_json(v, name);
      try {
        PureState check(s);
      } catch (const Error& e) {
        schema(name, e.what());
      }
      return json_io::to_json(s);
    }
    case Kind::kNumber:
      return finite_number(v, name);
    case Kind::kNumberList: {
      if (!v.is_array() || v.empty()) schema(name, "expected a non-empty list of numbers");
      Json out = Json::array();
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(finite_number(v[i], name + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
    case Kind::kCount:
      return count(v, name);
    case Kind::kCountOrList: {
      if (v.is_number()) return Json::array({count(v, name)});
      if (!v.is_array() || v.empty()) schema(name, "expected an integer or a list");
      Json out = Json::array();
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(count(v[i], name + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
    case Kind::kSeed:
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        schema(name, "expected an unsigned 64-bit integer");
      }
      return v.get<std::uint64_t>();
    case Kind::kBool:
      if (!v.is_boolean()) schema(name, "expected true or false");
      return v;
    case Kind::kChoice: {
      if (!v.is_string()) schema(name, "expected a string");
      std::string s = lower(v.get<std::string>());
      if (s == "x'") s = "xprime";
      for (std::string_view c : f.choices) {
        if (s == c) return s;
      }
      std::string options;
      for (std::string_view c : f.choices) options += (options.empty() ? "" : ", ") + std::string(c);
      schema(name, "expected one of " + options);
    }
    case Kind::kString:
      if (!v.is_string()) schema(name, "expected a string");
      return v;
  }
  schema(name, "unsupported field");
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kWeakValue: return "weak-value";
    case Command::kDensity: return "density";
    case Command::kPostselectProb: return "postselect-prob";
    case Command::kKick: return "kick";
    case Command::kSequential: return "sequential";
    case Command::kCollective: return "collective";
    case Command::kLindblad: return "lindblad";
    case Command::kDisturbance: return "disturbance";
    case Command::kSimulate: return "simulate";
    case Command::kAnomalous: return "anomalous";
    case Command::kThreshold: return "threshold";
  }
  return "unknown";
}

std::vector<std::string_view> command_names() {
  std::vector<std::string_view> out;
  for (int i = 0; i <= static_cast<int>(Command::kThreshold); ++i) {
    out.push_back(to_string(static_cast<Command>(i)));
  }
  return out;
}

Command command_from_string(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Command::kThreshold); ++i) {
    if (to_string(static_cast<Command>(i)) == name) return static_cast<Command>(i);
  }
  schema("command", "unknown command '" + std::string(name) + "'");
}

RunConfig parse_config(const Json& document) {
  if (!document.is_object()) schema("<root>", "expected a JSON object");
  if (!document.contains("command") || !document["command"].is_string()) {
    schema("command", "required string");
  }
  RunConfig cfg;
  cfg.command = command_from_string(document["command"].get<std::string>());
  const std::vector<Field> fields = schema_for(cfg.command);

  for (const auto& [key, value] : document.items()) {
    const bool known = std::any_of(fields.begin(), fields.end(),
                                   [&](const Field& f) { return f.name == key; });
    if (!known) {
      schema(key, "unknown key for command " + std::string(to_string(cfg.command)));
    }
  }

  Json params = Json::object();
  for (const Field& f : fields) {
    const std::string name(f.name);
    if (document.contains(name) && !document[name].is_null()) {
      params[name] = validate_field(f, document[name]);
    } else if (f.required) {
      schema(name, "required");
    } else if (!f.fallback.is_null()) {
      params[name] = f.fallback;
    }
  }

  if (grid_capable(cfg.command)) {
    if (params.contains("lambda") && params.contains("lambda_grid")) {
      schema("lambda_grid", "cannot be combined with lambda");
    }
    if (!params.contains("lambda") && !params.contains("lambda_grid")) {
      if (cfg.command == Command::kDisturbance || cfg.command == Command::kLindblad) {
        params["lambda"] = 0.1;
      } else {
        params["lambda_grid"] = kDefaultGrid;
      }
    }
  }
  if (cfg.command == Command::kSimulate) {
    const std::string protocol = params["protocol"];
    if (protocol != "threshold" && !params.contains("phi")) {
      schema("phi", "required for protocol " + protocol);
    }
    if (protocol == "sequential" && !params.contains("observable_b")) {
      schema("observable_b", "required for protocol sequential");
    }
  }

  cfg.seed = params["seed"].get<std::uint64_t>();
  cfg.threads = params["threads"].get<unsigned>();
  cfg.format = params["format"].get<std::string>();
  if (params.contains("out")) cfg.out = params["out"].get<std::string>();
  Json hashed = params;
  hashed.erase("threads");
  hashed.erase("out");
  cfg.hash = json_io::canonical_hash(hashed);
  cfg.params = std::move(params);
  return cfg;
}

Json parse_json_text(std::string_view text, std::string_view origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError,
                std::string(origin) + ": malformed JSON (" + e.what() + ")");
  }
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileError, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_json_text(text.str(), path.string());
}

std::vector<double> parse_number_list(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      schema("lambda_grid", "cannot read number '" + token + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) schema("lambda_grid", "empty list");
  return out;
}

}  // namespace wmsim::cli
