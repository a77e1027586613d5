// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revlin {

enum class Errc {
  kInvalidCell,
  kGarbageLeak,
  kAliasViolation,
  kDivideByZero,
  kNonInvertible,
  kCopyOverlap,
  kShapeMismatch,
  kOverlapError,
  kSingularPivot,
  kSingular,
  kZeroPivot,
  kBitLimit,
  kParse,
  kInvalidArgument,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidCell: return "InvalidCell";
    case Errc::kGarbageLeak: return "GarbageLeak";
    case Errc::kAliasViolation: return "AliasViolation";
    case Errc::kDivideByZero: return "DivideByZero";
    case Errc::kNonInvertible: return "NonInvertible";
    case Errc::kCopyOverlap: return "CopyOverlap";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kOverlapError: return "OverlapError";
    case Errc::kSingularPivot: return "SingularPivot";
    case Errc::kSingular: return "Singular";
    case Errc::kZeroPivot: return "ZeroPivot";
    case Errc::kBitLimit: return "BitLimit";
    case Errc::kParse: return "ParseError";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure in the engine is reported through this type. `path` holds
/// the labels of the program nodes that were executing when a primitive
/// failed (outermost first); `row` is set for pivot failures.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Error(Errc code, const std::string& message, std::size_t row)
      : Error(code, message) {
    row_ = row;
  }

  Errc code() const noexcept { return code_; }
  const std::vector<std::string>& path() const noexcept { return path_; }
  std::optional<std::size_t> row() const noexcept { return row_; }

  void push_label(std::string label) { path_.insert(path_.begin(), std::move(label)); }

 private:
  Errc code_;
  std::vector<std::string> path_;
  std::optional<std::size_t> row_;
};

}  // namespace revlin
