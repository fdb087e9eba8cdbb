// Copyright 2026 The actsum Authors
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

#ifndef ACTSUM_ERROR_HPP_
#define ACTSUM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace actsum {

enum class ErrorCode {
  kInvalidArgument,
  kNotSymmetric,
  kNotPositiveDefinite,
  kNonFiniteValue,
  kShapeMismatch,
  kIndexOutOfRange,
  kEmptyInput,
  kEmptyAnnotations,
  kDegenerateWeights,
  kSingularSubset,
  kEmptyDataset,
  kLengthMismatch,
  kTooFewUsers,
  kEmptySelection,
  kBadMagic,
  kTruncatedFile,
  kNonFiniteEntry,
  kChecksumMismatch,
  kVersionUnsupported,
  kInvalidSpec,
  kParseError,
  kIoError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyAnnotations: return "EmptyAnnotations";
    case ErrorCode::kDegenerateWeights: return "DegenerateWeights";
    case ErrorCode::kSingularSubset: return "SingularSubset";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kTooFewUsers: return "TooFewUsers";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kNonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// Every failure in the library surfaces as an Error carrying a code that
// callers (and tests) can branch on; the message names the offending value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace actsum

#endif  // ACTSUM_ERROR_HPP_
