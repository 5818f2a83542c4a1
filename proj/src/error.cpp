// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/error.hpp"

namespace bbrt {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownToken: return "UnknownToken";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kRadiusMismatch: return "RadiusMismatch";
    case ErrorCode::kTooFewItems: return "TooFewItems";
    case ErrorCode::kWrongOracle: return "WrongOracle";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kDegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::kNoPairsFound: return "NoPairsFound";
    case ErrorCode::kEmptyTraining: return "EmptyTraining";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kNoCompleted: return "NoCompleted";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kCountTooLarge: return "CountTooLarge";
    case ErrorCode::kUnknownIteration: return "UnknownIteration";
    case ErrorCode::kInvalidCandidate: return "InvalidCandidate";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

UnknownTokenError::UnknownTokenError(std::string symbol, std::size_t position)
    : Error(ErrorCode::kUnknownToken,
            "unknown token '" + symbol + "' at position " + std::to_string(position)),
      symbol_(std::move(symbol)),
      position_(position) {}

}  // namespace bbrt
