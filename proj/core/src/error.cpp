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

#include "wmsim/error.hpp"

namespace wmsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kOrthogonalPostselection: return "OrthogonalPostselection";
    case ErrorCode::kProportionalToIdentity: return "ProportionalToIdentity";
    case ErrorCode::kBasisMismatch: return "BasisMismatch";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
    case ErrorCode::kZeroProbabilityOutcome: return "ZeroProbabilityOutcome";
    case ErrorCode::kTermBudgetExceeded: return "TermBudgetExceeded";
    case ErrorCode::kNoPostselectedRuns: return "NoPostselectedRuns";
    case ErrorCode::kNumericQuality: return "NumericQuality";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kFileError: return "FileError";
  }
  return "Unknown";
}

}  // namespace wmsim
