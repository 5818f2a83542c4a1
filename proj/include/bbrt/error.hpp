// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bbrt {

enum class ErrorCode {
  kUnknownToken,
  kEmptyInput,
  kRadiusMismatch,
  kTooFewItems,
  kWrongOracle,
  kEmptyGraph,
  kDegenerateCorpus,
  kNoPairsFound,
  kEmptyTraining,
  kModeMismatch,
  kProtocolError,
  kTimeout,
  kInvalidDistribution,
  kNoCompleted,
  kMissingReference,
  kEmptyBatch,
  kCountTooLarge,
  kUnknownIteration,
  kInvalidCandidate,
  kLengthMismatch,
  kInvalidArgument,
  kIo,
  kConfig,
  kConflict,
  kNotFound,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class UnknownTokenError : public Error {
 public:
  UnknownTokenError(std::string symbol, std::size_t position);

  const std::string& symbol() const noexcept { return symbol_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string symbol_;
  std::size_t position_;
};

}  // namespace bbrt
