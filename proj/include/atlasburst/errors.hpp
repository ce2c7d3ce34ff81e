#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace atlasburst {

// Base for every error the engine raises. `code()` is a stable machine-readable
// token (e.g. "syntax", "unknown_structure") surfaced by the CLI and the service.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(std::string code, const std::string& message, std::size_t line,
             std::size_t column)
      : Error(std::move(code), format(message, line, column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line,
                            std::size_t column) {
    if (line == 0) return message;
    return "line " + std::to_string(line) + ", offset " +
           std::to_string(column) + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace atlasburst
