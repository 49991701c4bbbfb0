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

#include <ostream>

#include "wmsim/cli/config.hpp"
#include "wmsim/error.hpp"

namespace wmsim::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitNumeric = 4;

/// Exit status for an error code: configuration problems 2, domain errors 3,
/// numeric-quality failures 4.
int exit_code(ErrorCode code);

/// Runs the command, writes artifacts under cfg.out (when set) and prints a
/// one-line key=value summary to `out`. Module errors propagate as
/// wmsim::Error.
void dispatch(const RunConfig& cfg, std::ostream& out);

/// dispatch() wrapped with error reporting: the diagnostic goes to `err` and
/// the mapped exit status is returned.
int run_guarded(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace wmsim::cli
