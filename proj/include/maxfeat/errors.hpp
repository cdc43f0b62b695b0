// Copyright 2026 The maxfeat Authors
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace maxfeat {

enum class ErrorCode {
  kShapeMismatch,
  kNotSymmetric,
  kNotPositiveDefinite,
  kRankTooLarge,
  kEmptyMatrix,
  kSingularStart,
  kNonFiniteLoss,
  kNSelectOutOfRange,
  kAlphaOutOfRange,
  kInvalidArgument,
  kParseError,
  kEmptyDataset,
  kEmptyFeatureSpace,
  kUnknownItem,
  kTooFewItems,
  kIoError,
  kConfigError,
};

// Coarse grouping used by the C API and CLI exit codes.
enum class ErrorClass { kConfig, kData, kNumeric };

std::string_view error_code_name(ErrorCode code);
ErrorClass error_class(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace maxfeat
