#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repread {

enum class ErrorKind {
  kInvalidArgument,
  kInvalidLayer,
  kInvalidConfig,
  kEmptyInput,
  kInvalidSplit,
  kDatasetTooSmall,
  kDimensionMismatch,
  kIo,
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kNonFinite,
  kHashMismatch,
  kMissingCondition,
  kDegenerateData,
  kDegenerateAnchors,
  kMissingInput,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace repread
