#ifndef NERKIT_ERROR_HPP
#define NERKIT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nerkit {

// Base for all toolkit errors. The CLI maps the subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed corpus rows, invalid IOB, mismatched corpora.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Operand shapes do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Numerically impossible requests (all-masked softmax, no legal path, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Model container problems: truncation, checksum, version.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace nerkit

#endif  // NERKIT_ERROR_HPP
