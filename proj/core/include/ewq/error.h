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

#ifndef EWQ_ERROR_H_
#define EWQ_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ewq {

// Categories of failure raised by the library. The CLI maps every code to
// the "data/validation" exit status; usage errors are detected before the
// library is called.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kMalformedHeader,
  kOutOfBounds,
  kOverlap,
  kUnsupportedDtype,
  kTruncated,
  kNanValue,
  kNoMatch,
  kConflict,
  kEmptyInput,
  kNonFinite,
  kZeroSize,
  kNoMachines,
  kZeroCapacity,
  kMissingColumn,
  kInconsistentLabel,
  kParse,
  kConstantFeature,
  kTooFewRecords,
  kSingleClass,
  kUnfitted,
  kZeroVariance,
  kLengthMismatch,
  kNonPositive,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ewq

#endif  // EWQ_ERROR_H_
