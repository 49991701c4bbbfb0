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
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "wmsim/collective.hpp"
#include "wmsim/lindblad.hpp"
#include "wmsim/montecarlo.hpp"
#include "wmsim/pointer.hpp"
#include "wmsim/protocols.hpp"
#include "wmsim/quantum_core.hpp"

namespace wmsim::json_io {

using Json = nlohmann::json;

// Readers throw Error(kSchemaError) naming `path` for malformed input.
// Complex numbers are [re, im] pairs; a bare number is read as real.
Complex complex_from_json(const Json& j, const std::string& path);
Vector vector_from_json(const Json& j, const std::string& path);
/// Accepts a flat row-major list of d*d entries or a list of d rows.
Matrix matrix_from_json(const Json& j, const std::string& path);

Json to_json(Complex z);
Json to_json(const Vector& v);
/// Flat row-major list of [re, im] pairs.
Json matrix_to_json(const Matrix& m);
Json to_json(const PureState& s);
Json to_json(const PointerWavefunction& w);
PointerWavefunction pointer_from_json(const Json& j, const std::string& path);
Json to_json(const DisturbanceReport& r);
Json to_json(const GdiReport& r);
Json to_json(const TrialStatistics& s);
Json to_json(const AnalyticTargets& t);
Json to_json(const TrialPlan& plan);

std::string_view to_string(MeterBasis basis);
std::string_view to_string(Protocol protocol);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
/// FNV-1a of the compact dump of `j` (object keys are sorted by the library).
std::uint64_t canonical_hash(const Json& j);
std::string hex64(std::uint64_t v);

}  // namespace wmsim::json_io
