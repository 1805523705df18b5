// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srmnet {

enum class ErrorCode {
  ShapeMismatch,
  NonScalarLoss,
  NonFiniteGradient,
  NonFiniteValue,
  IndivisibleSize,
  BranchCountMismatch,
  UnresolvedShape,
  CorruptFile,
  TensorCountMismatch,
  UnsupportedFormat,
  TruncatedPayload,
  PatchTooLarge,
  ImageTooSmall,
  ConfigInvalid,
  EmptyDataset,
  NonFiniteLoss,
  ModelTooLarge,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonScalarLoss: return "NonScalarLoss";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IndivisibleSize: return "IndivisibleSize";
    case ErrorCode::BranchCountMismatch: return "BranchCountMismatch";
    case ErrorCode::UnresolvedShape: return "UnresolvedShape";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::TensorCountMismatch: return "TensorCountMismatch";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::ModelTooLarge: return "ModelTooLarge";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception. The code is
/// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace srmnet
