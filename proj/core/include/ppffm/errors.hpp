#ifndef PPFFM_ERRORS_HPP_
#define PPFFM_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ppffm {

// Malformed input file. line is 1-based, 0 when not attributable to a line.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& msg, std::size_t line = 0)
      : std::runtime_error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A domain invariant was violated (non-monotone times, bad bounds, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system trouble: missing inputs, unwritable outputs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite or otherwise unusable result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An MCMC chain failed to initialise or got stuck.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppffm

#endif  // PPFFM_ERRORS_HPP_
