// Copyright 2026 The nmqt Authors
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

namespace nmqt {

enum class ErrorKind {
  InvalidDimension,
  InvalidParameter,
  InadequateTruncation,
  DegenerateState,
  Type,
  Index,
  Shape,
  Validation,
  NumericalInstability,
  Resolution,
  NegligibleProbability,
  Unsupported,
  InvalidBaseline,
  InvalidSplit,
  MissingFile,
  Parse,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InadequateTruncation: return "inadequate-truncation";
    case ErrorKind::DegenerateState: return "degenerate-state";
    case ErrorKind::Type: return "type";
    case ErrorKind::Index: return "index";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::NumericalInstability: return "numerical-instability";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::NegligibleProbability: return "negligible-probability";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::InvalidBaseline: return "invalid-baseline";
    case ErrorKind::InvalidSplit: return "invalid-split";
    case ErrorKind::MissingFile: return "missing-file";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace nmqt
