#pragma once

#include <stdexcept>
#include <string>

namespace aai {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { parse = 2, data = 3, invariant = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Malformed input text or bytes (bad magic, bad JSON, truncated payload).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

/// Well-formed input that violates a data contract (shape mismatch, NaN,
/// zero-variance channel, too few samples).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what)
      : Error(ErrorKind::invariant, what) {}
};

}  // namespace aai
