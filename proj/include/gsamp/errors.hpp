#pragma once

#include <stdexcept>
#include <string>

namespace gsamp {

// Machine-readable error categories; the CLI reports these as `code`.
enum class ErrorCode {
  invalid_parameter,
  invalid_input,
  invalid_kernel,
  parse_error,
  io_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidParameter : Error {
  explicit InvalidParameter(const std::string& what)
      : Error(ErrorCode::invalid_parameter, what) {}
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what)
      : Error(ErrorCode::invalid_input, what) {}
};

struct InvalidKernel : Error {
  explicit InvalidKernel(const std::string& what)
      : Error(ErrorCode::invalid_kernel, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorCode::parse_error,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::io_error, what) {}
};

}  // namespace gsamp
