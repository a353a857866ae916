// Copyright 2026 The edgecalib Authors
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

#ifndef EDGECALIB_ERRORS_HPP_
#define EDGECALIB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace edgecalib {

enum class ErrorCode {
  kIo,
  kParse,
  kInvalidArgument,
  kUnsupportedFormat,
  kCorruptStream,
  kDegenerateRanges,
  kNoImageEdges,
  kInsufficientNeighbors,
  kDegenerateLine,
  kDegenerateBias,
  kInsufficientCorrespondences,
  kDegenerateGeometry,
  kUnknownScene,
};

const char* to_string(ErrorCode code);

/// Exception type thrown by every library entry point. The code is stable and
/// is what the C API and the CLI exit codes are derived from.
class CalibError : public std::runtime_error {
 public:
  CalibError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edgecalib

#endif  // EDGECALIB_ERRORS_HPP_
