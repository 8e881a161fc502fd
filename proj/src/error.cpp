// Copyright 2026 The alignmon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "alignmon/error.hpp"

namespace alignmon {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kNegativeMass: return "NegativeMass";
    case ErrorCode::kMassSumMismatch: return "MassSumMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptySupport: return "EmptySupport";
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kNoObservations: return "NoObservations";
    case ErrorCode::kDegenerateRow: return "DegenerateRow";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kNonStochasticRow: return "NonStochasticRow";
    case ErrorCode::kMissingRow: return "MissingRow";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidProbability: return "InvalidProbability";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kRuntime: return "Runtime";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out(error_code_name(code));
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index, std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)),
      code_(code),
      index_(index),
      line_(line) {}

}  // namespace alignmon
