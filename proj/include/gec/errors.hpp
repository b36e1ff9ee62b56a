#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gec {

// Input data could not be used: malformed files, misaligned corpora,
// unknown labels. The CLI maps every DataError to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& detail, const std::string& source = {})
      : DataError((source.empty() ? std::string() : source + ":") + "line " + std::to_string(line) +
                  ": " + detail),
        line_(line),
        detail_(detail) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

// A caller broke a documented precondition (overlapping edits passed to
// apply_edits, infeasible selection matrix, mismatched dimensions).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Failures inside the optimizer. The CLI maps these to exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonconvergenceError : public SolverError {
 public:
  NonconvergenceError(const std::string& what, double last_lambda)
      : SolverError(what), last_lambda_(last_lambda) {}

  double last_lambda() const noexcept { return last_lambda_; }

 private:
  double last_lambda_;
};

}  // namespace gec
