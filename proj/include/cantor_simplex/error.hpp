#pragma once

#include <stdexcept>
#include <string>

namespace cantor_simplex {

enum class ErrorKind {
  MalformedInput,  // unparsable or schema-violating input
  Precondition,    // well-formed input that violates an operation's contract
  Budget,          // a search or construction ran out of its budget
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cantor_simplex
