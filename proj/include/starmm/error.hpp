// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace starmm {

enum class ErrorCode {
  InvalidSplit,
  DimMismatch,
  NotBaseCase,
  AllocFailure,
  ContractViolation,
  AlignmentError,
  NoAdditiveInverse,
  TooLarge,
  InternalError,
  UnsupportedAlgorithm,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NotBaseCase: return "NotBaseCase";
    case ErrorCode::AllocFailure: return "AllocFailure";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::NoAdditiveInverse: return "NoAdditiveInverse";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InternalError: return "InternalError";
    case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace starmm
