// Copyright 2026 The Mixseg Authors.
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

#ifndef MIXSEG_ERROR_H_
#define MIXSEG_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixseg {

// Category of a library failure. The CLI maps every kind except kUsage to
// exit status 1.
enum class ErrorKind {
  kDimension,         // shapes disagree or are non-positive
  kCorruption,        // serialized data violates its own invariants
  kConfig,            // parameter outside its legal range
  kDegenerateInput,   // input is well-formed but the operation is undefined
  kContractViolation, // a pluggable component broke its contract
  kInfeasible,        // no solution exists for the given sizes
  kFormat,            // file content malformed
  kIntegrity,         // cross-file references disagree
  kProvenance,        // category not traceable to a source label space
  kNotFound,          // referenced entity missing
  kIo,                // filesystem failure
  kUsage,             // command-line misuse
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mixseg

#endif  // MIXSEG_ERROR_H_
