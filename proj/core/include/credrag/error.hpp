#pragma once

#include <stdexcept>
#include <string>

namespace credrag {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad JSON, bad date, unparseable field.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    /// 1-based input line, 0 when not line-oriented.
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Well-formed input that breaks a domain invariant.
class SchemaError : public Error {
  public:
    SchemaError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// Invalid run or component configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Generated text failed its containment check on every attempt.
class ValidationError : public Error {
  public:
    using Error::Error;
};

}  // namespace credrag
