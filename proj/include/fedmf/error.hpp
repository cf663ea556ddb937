/*
 * Copyright 2026 The FedMF Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FEDMF_ERROR_HPP_
#define FEDMF_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedmf {

enum class ErrorCode {
  kIdOutOfRange,
  kEmptyDataset,
  kNoObservations,
  kInfeasibleDensity,
  kParseError,
  kTooFewUsers,
  kShapeMismatch,
  kUnknownUser,
  kDegenerateProfile,
  kInsufficientRounds,
  kEncodingOverflow,
  kInvalidArgument,
  kValidation,
  kSchemaVersion,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIdOutOfRange: return "IdOutOfRange";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kNoObservations: return "NoObservations";
    case ErrorCode::kInfeasibleDensity: return "InfeasibleDensity";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kTooFewUsers: return "TooFewUsers";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kUnknownUser: return "UnknownUser";
    case ErrorCode::kDegenerateProfile: return "DegenerateProfile";
    case ErrorCode::kInsufficientRounds: return "InsufficientRounds";
    case ErrorCode::kEncodingOverflow: return "EncodingOverflow";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kSchemaVersion: return "SchemaVersion";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fedmf

#endif  // FEDMF_ERROR_HPP_
