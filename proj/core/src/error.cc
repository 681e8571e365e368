/*
 * Copyright 2026 The EWQ Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ewq/error.h"

namespace ewq {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformedHeader: return "malformed_header";
    case ErrorCode::kOutOfBounds: return "out_of_bounds";
    case ErrorCode::kOverlap: return "overlap";
    case ErrorCode::kUnsupportedDtype: return "unsupported_dtype";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kNanValue: return "nan_value";
    case ErrorCode::kNoMatch: return "no_match";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kZeroSize: return "zero_size";
    case ErrorCode::kNoMachines: return "no_machines";
    case ErrorCode::kZeroCapacity: return "zero_capacity";
    case ErrorCode::kMissingColumn: return "missing_column";
    case ErrorCode::kInconsistentLabel: return "inconsistent_label";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConstantFeature: return "constant_feature";
    case ErrorCode::kTooFewRecords: return "too_few_records";
    case ErrorCode::kSingleClass: return "single_class";
    case ErrorCode::kUnfitted: return "unfitted";
    case ErrorCode::kZeroVariance: return "zero_variance";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kNonPositive: return "non_positive";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace ewq
