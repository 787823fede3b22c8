#pragma once

#include <stdexcept>
#include <string>

namespace opaq {

enum class ErrorKind {
  Validation,   // malformed input or violated precondition
  Unsupported,  // the question is outside what can be decided
  Resource,     // a configured cap was exceeded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace opaq
