#pragma once

#include <stdexcept>
#include <string>

namespace lgle {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical quantity lost all significance (vanishing density, non-positive
// determinant). Callers may retry with a finer grid or higher precision.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configured budget (enumeration size, attempts, grid width) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace lgle
