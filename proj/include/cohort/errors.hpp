#pragma once

#include <stdexcept>
#include <string>

namespace cohort {

// Base class for everything thrown on purpose by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent inputs: bad config values, schema violations,
// label indices outside the schema, files whose contents do not match the
// documented formats.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem problems: missing files, unreadable/unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

// A model answer from which no label list could be extracted.
class AnswerParseError : public Error {
 public:
  using Error::Error;
};

// Network-level failure (connection refused, timeout) after retries were
// exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The remote API answered with a non-retryable error status, or retries on a
// retryable status ran out.
class ApiError : public Error {
 public:
  ApiError(int status, const std::string& message)
      : Error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace cohort
