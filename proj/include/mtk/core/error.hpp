#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtk {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed structure, vocabulary or sentence (arity, unknown element, sort).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must share a vocabulary do not.
class VocabularyMismatch : public Error {
 public:
  using Error::Error;
};

/// A configured resource bound (candidate count, quantifier depth, ...) was hit.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed; carries a 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace mtk
