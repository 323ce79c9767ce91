#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qontext {

// Base for every failure caused by input data (as opposed to usage errors).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MalformedRecord : public DataError {
public:
  MalformedRecord(std::size_t line, const std::string& reason)
      : DataError("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t line_;
  std::string reason_;
};

class DuplicateSubject : public DataError {
public:
  DuplicateSubject(std::size_t line, const std::string& subject_id, const std::string& experiment_id)
      : DataError("line " + std::to_string(line) + ": duplicate session for subject '" + subject_id +
                  "' in experiment '" + experiment_id + "'"),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class InsufficientData : public DataError {
public:
  using DataError::DataError;
};

// A conditional probability with positive weight is needed but its condition was never observed.
class UndefinedTerm : public DataError {
public:
  using DataError::DataError;
};

// |lambda| > 1: no real phase exists.
class HyperbolicRegime : public DataError {
public:
  using DataError::DataError;
};

class UnrepresentableSpec : public DataError {
public:
  using DataError::DataError;
};

}  // namespace qontext
