#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sgca {

// Every error carries a short machine-parseable code. The CLI prints it as
// "error_code:<code>" and maps the category to an exit status:
// validation -> 1, numerical failure -> 2.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }
  virtual int exit_code() const noexcept { return 1; }

 private:
  std::string code_;
};

// Bad inputs: shapes, ranges, file contents, call ordering.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class StateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite values encountered mid-computation.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

}  // namespace sgca
