#pragma once

#include <stdexcept>
#include <string>

namespace hsprobe {

/// Failure categories. Each maps to a fixed CLI exit code.
enum class ErrorKind {
  kIo,            // 1
  kValidation,    // 2 (also malformed input and domain violations)
  kCapacity,      // 3
  kMismatch,      // 4
  kInsufficient,  // 5
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_) + 1; }

 private:
  ErrorKind kind_;
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// Transport failures (network, file system) surface as I/O errors.
using TransportError = IoError;

struct ValidationError : Error {
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

/// Malformed serialized input: bad JSON, bad offsets, NaN payloads.
struct FormatError : Error {
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

/// An argument outside the mathematical domain of an operation.
struct DomainError : Error {
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

struct CapacityError : Error {
  explicit CapacityError(const std::string& what)
      : Error(ErrorKind::kCapacity, what) {}
};

struct MismatchError : Error {
  explicit MismatchError(const std::string& what)
      : Error(ErrorKind::kMismatch, what) {}
};

struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& what)
      : Error(ErrorKind::kInsufficient, what) {}
};

/// A pipeline stage is missing an upstream stage's output.
struct DependencyError : Error {
  explicit DependencyError(const std::string& what)
      : Error(ErrorKind::kIo, what) {}
};

}  // namespace hsprobe
