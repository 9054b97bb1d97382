#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tpc {

// Caller broke a precondition (width mismatch, wrong role, missing key...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Channel-level failure: peer went away, socket error.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A frame arrived with an unexpected type or an inconsistent length.
class FramingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A verification step failed; `check()` names it (e.g. "mul.verify").
class ProtocolAbort : public std::runtime_error {
 public:
  explicit ProtocolAbort(std::string check)
      : std::runtime_error("abort: " + check), check_(std::move(check)) {}
  const std::string& check() const { return check_; }

 private:
  std::string check_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tpc
