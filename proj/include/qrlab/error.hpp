#pragma once

#include <stdexcept>
#include <string>

namespace qrlab {

// Failure categories map one-to-one onto CLI exit statuses.
enum class ErrorKind {
  invalid_argument,
  config,
  numeric_overflow,
  unsupported,
  not_found,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::invalid_argument, what);
}

}  // namespace qrlab
