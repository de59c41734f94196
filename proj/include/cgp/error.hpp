#pragma once

#include <stdexcept>
#include <string>

namespace cgp {

/// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  Argument = 1,
  Configuration,
  Conditioning,
  Infeasible,
  UnsupportedDerivative,
  SamplerStall,
  IterationLimit,
  Parse,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorCode::Argument, what) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what) : Error(ErrorCode::Configuration, what) {}
};

class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& what) : Error(ErrorCode::Conditioning, what) {}
};

/// Raised when a constraint system has no feasible point. `row` is the
/// offending row when one can be named, otherwise -1.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, long row) : Error(ErrorCode::Infeasible, what), row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

class UnsupportedDerivativeError : public Error {
 public:
  explicit UnsupportedDerivativeError(const std::string& what)
      : Error(ErrorCode::UnsupportedDerivative, what) {}
};

class SamplerStallError : public Error {
 public:
  explicit SamplerStallError(const std::string& what) : Error(ErrorCode::SamplerStall, what) {}
};

class IterationLimitError : public Error {
 public:
  explicit IterationLimitError(const std::string& what) : Error(ErrorCode::IterationLimit, what) {}
};

/// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line) : Error(ErrorCode::Parse, what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

/// Rethrows `e` as its own category with `context` prepended to the message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.code()) {
    case ErrorCode::Argument: throw ArgumentError(what);
    case ErrorCode::Configuration: throw ConfigurationError(what);
    case ErrorCode::Conditioning: throw ConditioningError(what);
    case ErrorCode::Infeasible: throw InfeasibleError(what, static_cast<const InfeasibleError&>(e).row());
    case ErrorCode::UnsupportedDerivative: throw UnsupportedDerivativeError(what);
    case ErrorCode::SamplerStall: throw SamplerStallError(what);
    case ErrorCode::IterationLimit: throw IterationLimitError(what);
    case ErrorCode::Parse: throw ParseError(what, static_cast<const ParseError&>(e).line());
    case ErrorCode::Io: throw IoError(what);
  }
  throw Error(e.code(), what);
}

}  // namespace cgp
