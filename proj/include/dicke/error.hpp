// Copyright 2026 The Dicke Lab Authors
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

namespace dicke {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionCapExceeded,
  kInvalidTruncation,
  kEmptyInput,
  kNonConvergence,
  kUnstableCrystal,
  kImaginaryFrequency,
  kIndexOutOfRange,
  kTruncationTooSmall,
  kBasisMismatch,
  kKrylovBreakdown,
  kNormDrift,
  kNonzeroField,
  kSiteOutOfRange,
  kEmptySeries,
  kMixedAxes,
  kEmptySelection,
  kSubsystemTooLarge,
  kDegenerateData,
  kNoRecords,
  kNotPSD,
  kDegenerateAbscissa,
  kConfigError,
  kIOError,
  kResourceLimit,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorKind::kInvalidTruncation: return "InvalidTruncation";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kNonConvergence: return "NonConvergence";
    case ErrorKind::kUnstableCrystal: return "UnstableCrystal";
    case ErrorKind::kImaginaryFrequency: return "ImaginaryFrequency";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kTruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::kBasisMismatch: return "BasisMismatch";
    case ErrorKind::kKrylovBreakdown: return "KrylovBreakdown";
    case ErrorKind::kNormDrift: return "NormDrift";
    case ErrorKind::kNonzeroField: return "NonzeroField";
    case ErrorKind::kSiteOutOfRange: return "SiteOutOfRange";
    case ErrorKind::kEmptySeries: return "EmptySeries";
    case ErrorKind::kMixedAxes: return "MixedAxes";
    case ErrorKind::kEmptySelection: return "EmptySelection";
    case ErrorKind::kSubsystemTooLarge: return "SubsystemTooLarge";
    case ErrorKind::kDegenerateData: return "DegenerateData";
    case ErrorKind::kNoRecords: return "NoRecords";
    case ErrorKind::kNotPSD: return "NotPSD";
    case ErrorKind::kDegenerateAbscissa: return "DegenerateAbscissa";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kIOError: return "IOError";
    case ErrorKind::kResourceLimit: return "ResourceLimit";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace dicke
