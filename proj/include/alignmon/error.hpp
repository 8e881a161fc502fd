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

#ifndef ALIGNMON_ERROR_HPP_
#define ALIGNMON_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace alignmon {

// Numeric values are part of the C ABI (alignmon_status); append only.
enum class ErrorCode : int {
  kOk = 0,
  kNegativeMass = 1,
  kMassSumMismatch = 2,
  kIndexOutOfRange = 3,
  kEmptySupport = 4,
  kZeroNorm = 5,
  kDomainError = 6,
  kNoObservations = 7,
  kDegenerateRow = 8,
  kInvalidParams = 9,
  kSyntaxError = 10,
  kNonStochasticRow = 11,
  kMissingRow = 12,
  kMalformedRecord = 13,
  kDimensionMismatch = 14,
  kInvalidProbability = 15,
  kIoError = 16,
  kInvalidArgument = 17,
  kRuntime = 18,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Exception carried by every failing operation in the library. `line` is
/// set by the parsers (1-based), `index` by operations that can point at an
/// offending outcome or state.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
  std::optional<std::size_t> line_;
};

}  // namespace alignmon

#endif  // ALIGNMON_ERROR_HPP_
