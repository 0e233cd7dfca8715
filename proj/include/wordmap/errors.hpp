#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wordmap {

/// Raised when an input is well-formed but mathematically or operationally
/// unacceptable (non-prime modulus, rank mismatch, cost cap exceeded, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in a word or cycle string. `position` is a 0-based offset
/// into the original text.
class ParseError : public DomainError {
 public:
  ParseError(const std::string& message, std::size_t position)
      : DomainError(message + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace wordmap
