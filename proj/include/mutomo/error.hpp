#pragma once

#include <stdexcept>
#include <string>

namespace mutomo {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violated a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A region mask selected no voxels.
class EmptyRegionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class DecodeErrorKind { io, bad_magic, bad_version, truncated, count_mismatch, nan_field, invalid_record };

const char* to_string(DecodeErrorKind kind);

/// Raised by every binary/text reader on malformed input.
class DecodeError : public Error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& detail)
      : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

}  // namespace mutomo
