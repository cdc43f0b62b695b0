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

#include "maxfeat/errors.hpp"

namespace maxfeat {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kRankTooLarge: return "RankTooLarge";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kSingularStart: return "SingularStart";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kNSelectOutOfRange: return "NSelectOutOfRange";
    case ErrorCode::kAlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kEmptyFeatureSpace: return "EmptyFeatureSpace";
    case ErrorCode::kUnknownItem: return "UnknownItem";
    case ErrorCode::kTooFewItems: return "TooFewItems";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNSelectOutOfRange:
    case ErrorCode::kAlphaOutOfRange:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kConfigError:
      return ErrorClass::kConfig;
    case ErrorCode::kParseError:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kEmptyFeatureSpace:
    case ErrorCode::kUnknownItem:
    case ErrorCode::kTooFewItems:
    case ErrorCode::kIoError:
      return ErrorClass::kData;
    default:
      return ErrorClass::kNumeric;
  }
}

}  // namespace maxfeat
