#pragma once

#include <stdexcept>
#include <string>

namespace gpsr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Document loading.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class ReferenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class EmptyBank : public Error {
 public:
  using Error::Error;
};

class InvalidPlan : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Raised by backends. Only TransportError and Timeout are retried by the
// HTTP backend; none of these are retried by the planning loop.
class BackendError : public Error {
 public:
  using Error::Error;
};

class Timeout : public BackendError {
 public:
  using BackendError::BackendError;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ReplayMiss : public BackendError {
 public:
  using BackendError::BackendError;
};

class ScriptExhausted : public BackendError {
 public:
  using BackendError::BackendError;
};

// The planning loop could not get any response out of its backend. Distinct
// from an Unparseable planning outcome.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace gpsr
